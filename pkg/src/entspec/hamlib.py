"""Built-in Hamiltonians and the M3 eigenstate conditions for two-body H on 3 qubits.

Every built-in is defined by its program text (see :mod:`entspec.pauli`), so
the shipped ``data/*.ham`` files and the constructors cannot drift apart.
"""
import itertools
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .pauli import Coefficient, HamiltonianTerm, ParamHamiltonian, PauliString, parse_hamiltonian

AXIS_LABELS = "xyz"


def _ring(n):
    return [(i, i % n + 1) for i in range(1, n + 1)]


def _sum(monomials):
    return " + ".join(monomials)


def w_xx_text(n):
    if not 2 <= n <= 12:
        raise ValueError("W_XX Hamiltonian needs 2 <= n <= 12")
    hop = _sum(f"X{i} X{j} + Y{i} Y{j}" for i, j in _ring(n))
    field_ = _sum(f"Z{i}" for i in range(1, n + 1))
    return f"n={n}; -({hop}) + b*({field_})\n"


H3_TEXT = "n=3; J*(Z1 Z2 + Z2 Z3 + Z3 Z1) + k*(X1 X2 + X2 X3 + X3 X1 - X1 - X2 - X3)\n"

H4_TEXT = "n=4; J*(X4 Z1 + X3 Z2) + k*(X1 Z4 + X2 Z3 + X2 Z1 + X1 Z2 - Z1 - Z2 - Z3 - Z4)\n"

H5_TEXT = (
    "n=5;\n"
    "J*(X1 X2 + X2 X3 + X4 X5 + X5 X1 + Y3 Y4 - Z3 Z4 - 2*Z1)\n"
    "+ k*(Y1 Y2 + Y2 Y3 + Y4 Y5 + Z2 Z3 + Z4 Z5 + X2 - X3 + X4 - X5 - Z5)\n"
)


def ising0_text(n):
    if not 3 <= n <= 10:
        raise ValueError("Ising ring needs 3 <= n <= 10")
    return f"n={n}; -({_sum(f'Z{i} Z{j}' for i, j in _ring(n))})\n"


def ghz_family_text(n):
    """Ising ring plus lambda*(X1..Xm - X(m+1)..Xn), m = n // 2."""
    if not 3 <= n <= 10:
        raise ValueError("GHZ family needs 3 <= n <= 10")
    m = n // 2
    left = " ".join(f"X{i}" for i in range(1, m + 1))
    right = " ".join(f"X{i}" for i in range(m + 1, n + 1))
    ising = ising0_text(n).split(";", 1)[1].strip()
    return f"n={n}; {ising} + lambda*({left} - {right})\n"


def build_w_xx(n):
    """XX ring with uniform z field; parameter ``b``."""
    return parse_hamiltonian(w_xx_text(n))


def build_h3():
    """Ising-like zz and xx couplings plus tuned x field; parameters ``J``, ``k``."""
    return parse_hamiltonian(H3_TEXT)


def build_h4():
    return parse_hamiltonian(H4_TEXT)


def build_h5():
    return parse_hamiltonian(H5_TEXT)


def build_ising0(n):
    return parse_hamiltonian(ising0_text(n))


def build_ghz_family(n):
    """H(lambda) = H0 + lambda*H1 with G+ as an eigenstate for every lambda."""
    return parse_hamiltonian(ghz_family_text(n))


# --------------------------------------------------------------------------
# general two-body Hamiltonian on a 3-qubit ring


@dataclass
class TwoBodyParams3:
    """Couplings ``gamma[i, a, b]`` on bond (i, i+1) and fields ``h[i, a]``.

    Indices are 0-based here; axis order is x, y, z.
    """

    gamma: np.ndarray = field(default_factory=lambda: np.zeros((3, 3, 3)))
    h: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        self.gamma = np.array(self.gamma, dtype=float).reshape(3, 3, 3)
        self.h = np.array(self.h, dtype=float).reshape(3, 3)
        if not (np.isfinite(self.gamma).all() and np.isfinite(self.h).all()):
            raise ValueError("parameters must be finite")

    def to_vector(self):
        return np.concatenate([self.gamma.ravel(), self.h.ravel()])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v[:27], v[27:])

    @classmethod
    def from_h3(cls, J, k):
        p = cls()
        p.gamma[:, 2, 2] = J
        p.gamma[:, 0, 0] = k
        p.h[:, 0] = -k
        return p

    def to_json(self):
        return {"gamma": self.gamma.tolist(), "h": self.h.tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["gamma"], obj["h"])


def build_general3(p):
    terms = []
    for i, j in _ring(3):
        for a, b in itertools.product(range(3), repeat=2):
            g = p.gamma[i - 1, a, b]
            if g != 0:
                axes = {i: "XYZ"[a], j: "XYZ"[b]}
                terms.append(HamiltonianTerm(Coefficient(float(g)), PauliString.from_sites(3, axes)))
        for a in range(3):
            if p.h[i - 1, a] != 0:
                s = PauliString.from_sites(3, {i: "XYZ"[a]})
                terms.append(HamiltonianTerm(Coefficient(float(p.h[i - 1, a])), s))
    return ParamHamiltonian(3, terms)


def _g(i, a, b):
    return 9 * (i % 3) + 3 * "xyz".index(a) + "xyz".index(b)


def _h(i, a):
    return 27 + 3 * (i % 3) + "xyz".index(a)


def _cond3_system():
    """Rows of the linear system C @ params = 0 and their labels.

    Site labels in the text are 1-based and cyclic (site 4 is site 1).
    """
    rows, labels = [], []

    def add(coeffs, label):
        row = np.zeros(36)
        for idx, c in coeffs:
            row[idx] += c
        rows.append(row)
        labels.append(label)

    for i in range(3):
        s, t = i + 1, (i + 1) % 3 + 1
        # the x-field enters with opposite sign to the xx - yy anisotropy
        add([(_g(i + 1, "x", "x"), 1), (_g(i + 1, "y", "y"), -1), (_h(i, "x"), 1)],
            f"gamma_{t}^xx - gamma_{t}^yy + h_{s}^x = 0")
        add([(_g(i + 1, "x", "y"), 1), (_g(i + 1, "y", "x"), 1), (_h(i, "y"), -1)],
            f"gamma_{t}^xy + gamma_{t}^yx - h_{s}^y = 0")
        add([(_g(i + 1, "y", "z"), 1), (_g(i, "z", "y"), 1)],
            f"gamma_{t}^yz + gamma_{s}^zy = 0")
        add([(_g(i + 1, "x", "z"), 1), (_g(i, "z", "x"), 1)],
            f"gamma_{t}^xz + gamma_{s}^zx = 0")
    add([(_h(i, "z"), 1) for i in range(3)], "h_1^z + h_2^z + h_3^z = 0")
    return np.array(rows), labels


COND3_MATRIX, COND3_LABELS = _cond3_system()


@dataclass
class Cond3Report:
    satisfied: bool
    violations: list

    def to_json(self):
        return {
            "satisfied": self.satisfied,
            "violations": [{"condition": c, "residual": r} for c, r in self.violations],
        }


def check_cond3(p, tol=1e-10):
    """Check the conditions under which GHZ+ on 3 qubits is an eigenstate of ``p``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    residuals = COND3_MATRIX @ p.to_vector()
    violations = [
        (label, float(r)) for label, r in zip(COND3_LABELS, residuals) if abs(r) > tol
    ]
    return Cond3Report(not violations, violations)


def project_cond3(p):
    """Orthogonal projection of ``p`` onto the solution space of the conditions."""
    v = p.to_vector()
    c = COND3_MATRIX
    correction = np.linalg.lstsq(c, c @ v, rcond=None)[0]
    return TwoBodyParams3.from_vector(v - correction)


# --------------------------------------------------------------------------
# name registry

GOLDEN_FILES = {
    "h3.ham": H3_TEXT,
    "h4.ham": H4_TEXT,
    "h5.ham": H5_TEXT,
    **{f"wxx{n}.ham": w_xx_text(n) for n in range(3, 9)},
    **{f"ising0_{n}.ham": ising0_text(n) for n in range(3, 9)},
    **{f"ghzfam{n}.ham": ghz_family_text(n) for n in range(3, 9)},
}


def golden_text(filename):
    return resources.files("entspec").joinpath("data", filename).read_text()


def builtin_hamiltonian(name):
    """Resolve a built-in name: ``wxx:N``, ``h3``, ``h4``, ``h5``, ``ghzfam:N``, ``ising0:N``."""
    key, _, arg = name.strip().lower().partition(":")
    fixed = {"h3": build_h3, "h4": build_h4, "h5": build_h5}
    sized = {"wxx": build_w_xx, "ghzfam": build_ghz_family, "ising0": build_ising0}
    if key in fixed and not arg:
        return fixed[key]()
    if key in sized and arg.isdigit():
        return sized[key](int(arg))
    raise ValueError(f"unknown built-in Hamiltonian {name!r}")
