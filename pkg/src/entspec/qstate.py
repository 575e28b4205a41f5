"""Pure qubit states, reduced density matrices, purity and pi_ME.

Basis convention: index ``l`` of a 2**n amplitude array encodes the bit string
b1 b2 ... bn with qubit 1 as the most significant bit, and Z|b> = (-1)**b |b>.
Qubits are labelled 1..n throughout the public API.
"""
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, LengthMismatch

NORM_TOL = 1e-12

# Uniform real MMES coefficient tables, transcribed verbatim.
ZETA4 = (1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, -1, 1, 1, -1)
ZETA5 = (
    1, 1, 1, 1, 1, -1, -1, 1, 1, -1, -1, 1, 1, 1, 1, 1,
    1, 1, -1, -1, 1, -1, 1, -1, -1, 1, -1, 1, -1, -1, 1, 1,
)


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.n_qubits < 1:
            raise LengthMismatch("a state needs at least one qubit")
        if amps.size != 2**self.n_qubits:
            raise LengthMismatch(
                f"{amps.size} amplitudes do not fit {self.n_qubits} qubits"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize=True):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(amps.size))) if amps.size else 0
        if amps.size == 0 or 2**n != amps.size:
            raise LengthMismatch(f"length {amps.size} is not a power of two")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(n, amps)

    @property
    def dim(self):
        return self.amplitudes.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def to_json(self):
        return {
            "n": self.n_qubits,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        return cls(int(obj["n"]), amps)


@dataclass(frozen=True)
class Bipartition:
    """Subsystem A of an n-qubit register; the complement is implicit."""

    n_qubits: int
    subset_a: tuple

    def __post_init__(self):
        subset = tuple(sorted(int(q) for q in self.subset_a))
        if len(set(subset)) != len(subset):
            raise ValueError(f"repeated qubit in {subset}")
        if any(q < 1 or q > self.n_qubits for q in subset):
            raise IndexOutOfRange(f"qubits {subset} outside 1..{self.n_qubits}")
        if not 1 <= len(subset) <= self.n_qubits - 1:
            raise ValueError("subsystem A must be a nonempty proper subset")
        object.__setattr__(self, "subset_a", subset)

    @property
    def complement(self):
        return tuple(q for q in range(1, self.n_qubits + 1) if q not in self.subset_a)

    @property
    def balanced(self):
        return len(self.subset_a) == self.n_qubits // 2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    matrix: np.ndarray

    def validate(self, tol=1e-10):
        m = self.matrix
        if m.shape != (2**self.n_qubits,) * 2:
            raise DimensionMismatch(f"bad density matrix shape {m.shape}")
        if np.abs(m - m.conj().T).max() > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > tol:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(m).min() < -tol:
            raise ValueError("density matrix has a negative eigenvalue")
        return self

    def purity(self):
        # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        return float(np.sum(np.abs(self.matrix) ** 2))


def _as_bipartition(part, n):
    if isinstance(part, Bipartition):
        if part.n_qubits != n:
            raise DimensionMismatch(
                f"bipartition is for {part.n_qubits} qubits, state has {n}"
            )
        return part
    return Bipartition(n, tuple(part))


def _matricize(amplitudes, n, keep):
    """Reshape amplitudes into a (2**|keep|, 2**(n-|keep|)) matrix."""
    rest = [q for q in range(1, n + 1) if q not in keep]
    axes = [q - 1 for q in keep] + [q - 1 for q in rest]
    tensor = np.asarray(amplitudes).reshape((2,) * n).transpose(axes)
    return tensor.reshape(2 ** len(keep), -1)


def basis_state(n, bits):
    bits = [int(b) for b in bits]
    if len(bits) != n:
        raise LengthMismatch(f"{len(bits)} bits given for {n} qubits")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    index = int("".join(map(str, bits)), 2) if bits else 0
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def ghz(n, sign=+1):
    """(|0...0> + sign |1...1>) / sqrt(2)."""
    if n < 2:
        raise ValueError("GHZ states need n >= 2")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1 / math.sqrt(2)
    amps[-1] = sign / math.sqrt(2)
    return StateVector(n, amps)


def w_state(n):
    if n < 2:
        raise ValueError("W states need n >= 2")
    amps = np.zeros(2**n, dtype=complex)
    amps[[1 << j for j in range(n)]] = 1 / math.sqrt(n)
    return StateVector(n, amps)


def mmes3():
    return ghz(3, +1)


def mmes4():
    return StateVector(4, np.array(ZETA4) / 4)


def mmes4_reflected():
    """M4 with the coefficient table read backwards (l -> 15 - l)."""
    return StateVector(4, np.array(ZETA4[::-1]) / 4)


def mmes5():
    # 32 unit-modulus entries: the normalization is 1/sqrt(32)
    return StateVector(5, np.array(ZETA5) / math.sqrt(32))


def random_state(n, rng=None):
    """Haar-random state: complex Gaussian amplitudes, normalized."""
    rng = np.random.default_rng(rng)
    z = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return StateVector(n, z / np.linalg.norm(z))


def partial_trace(psi, keep):
    """Reduced density matrix of ``psi`` on the qubits in ``keep``.

    The kept qubits retain their relative order (lowest label = most
    significant bit of the reduced basis).
    """
    part = _as_bipartition(keep, psi.n_qubits)
    m = _matricize(psi.amplitudes, psi.n_qubits, part.subset_a)
    return DensityMatrix(len(part.subset_a), m @ m.conj().T)


def purity(psi, part):
    part = _as_bipartition(part, psi.n_qubits)
    m = _matricize(psi.amplitudes, psi.n_qubits, part.subset_a)
    # the smaller Gram matrix has the same nonzero spectrum
    gram = m @ m.conj().T if m.shape[0] <= m.shape[1] else m.conj().T @ m
    return float(np.sum(np.abs(gram) ** 2))


def balanced_bipartitions(n):
    if n < 2:
        raise ValueError("need n >= 2")
    return [
        Bipartition(n, subset)
        for subset in itertools.combinations(range(1, n + 1), n // 2)
    ]


def pme(psi):
    """Potential of multipartite entanglement: mean purity over balanced cuts.

    For even n every cut is counted twice (A and its complement), which leaves
    the mean unchanged.
    """
    parts = balanced_bipartitions(psi.n_qubits)
    return float(np.mean([purity(psi, p) for p in parts]))


def pme_bounds(n):
    return 2.0 ** -(n // 2), 1.0


def rdms_equal(psi, phi, k, tol=1e-10):
    """True iff every k-qubit reduced density matrix of psi and phi agrees."""
    n = psi.n_qubits
    if phi.n_qubits != n:
        raise DimensionMismatch("states have different qubit counts")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..{n - 1}")
    for subset in itertools.combinations(range(1, n + 1), k):
        a = partial_trace(psi, subset).matrix
        b = partial_trace(phi, subset).matrix
        if np.abs(a - b).max() > tol:
            return False
    return True
