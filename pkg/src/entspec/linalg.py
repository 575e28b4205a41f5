"""Dense Hermitian eigensolver and eigenvalue clustering.

Matrices are plain complex ``numpy.ndarray`` objects; the heavy lifting is
delegated to LAPACK (``numpy.linalg.eigh``) behind the contract checks below.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DimensionTooLarge, NonHermitian

MAX_DIM = 4096
HERMITIAN_RTOL = 1e-12
DEFAULT_CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with matching unit-norm eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors


@dataclass(frozen=True)
class Cluster:
    start: int
    count: int
    value: float


def frobenius(a):
    return float(np.linalg.norm(a))


def dagger(a):
    return np.conj(np.asarray(a)).T


def check_hermitian(h):
    """Validate shape and Hermiticity of ``h``; return it as a complex array."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] > MAX_DIM:
        raise DimensionTooLarge(f"dimension {h.shape[0]} exceeds {MAX_DIM}")
    asym = frobenius(h - dagger(h))
    if asym > HERMITIAN_RTOL * frobenius(h):
        raise NonHermitian(f"matrix is not Hermitian (||H - H^+||_F = {asym:.3e})")
    return h


def eig_hermitian(h):
    """Full eigendecomposition of a Hermitian matrix.

    Returns an :class:`EigenDecomposition` with eigenvalues sorted ascending.
    Eigenvectors inside degenerate clusters are an arbitrary orthonormal basis
    of the eigenspace.
    """
    h = check_hermitian(h)
    vals, vecs = np.linalg.eigh(h)
    return EigenDecomposition(vals, vecs)


def eigvals_hermitian(h):
    """Ascending eigenvalues only; same validation as :func:`eig_hermitian`."""
    return np.linalg.eigvalsh(check_hermitian(h))


def cluster_eigenvalues(values, tol=DEFAULT_CLUSTER_TOL):
    """Group an ascending array into maximal runs with consecutive gaps <= tol.

    Gaps are chained, so a run may span more than ``tol`` in total.  Each
    cluster's ``value`` is the mean of its members.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(values) > tol) + 1
    edges = np.concatenate(([0], breaks, [values.size]))
    return [
        Cluster(int(a), int(b - a), float(values[a:b].mean()))
        for a, b in zip(edges[:-1], edges[1:])
    ]
