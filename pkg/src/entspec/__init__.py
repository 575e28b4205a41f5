"""Exact spectra and multipartite-entanglement analysis for few-qubit Hamiltonians."""
from .errors import EntspecError
from .linalg import cluster_eigenvalues, eig_hermitian
from .pauli import PauliString, ParamHamiltonian, assemble, max_body_size, parse_hamiltonian, pauli_matrix
from .qstate import (
    Bipartition,
    StateVector,
    balanced_bipartitions,
    basis_state,
    ghz,
    mmes4,
    mmes4_reflected,
    mmes5,
    partial_trace,
    pme,
    purity,
    rdms_equal,
    w_state,
)

__version__ = "0.1.0"
