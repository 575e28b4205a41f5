"""Pauli strings, affine-parametric Hamiltonians and their text format.

A Hamiltonian program looks like::

    n=3; J*(Z1 Z2 + Z2 Z3 + Z3 Z1) + k*(X1 X2 + X2 X3 + X3 X1 - X1 - X2 - X3)

Monomials are whitespace-separated single-site factors (``X1``, ``Y3``,
``Z12``).  Coefficients are affine in the named parameters; a parenthesized
group multiplying a monomial is distributed over its terms at parse time,
except that a group holding only scalars (``(J + 2*k)``) collapses into one
coefficient.  ``#`` starts a comment running to the end of the line.
"""
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionTooLarge,
    DuplicateAxisOnSite,
    HamiltonianSyntaxError,
    SiteOutOfRange,
    UnboundParameter,
)

MAX_QUBITS = 12
AXES = "IXYZ"


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    axes: str

    def __post_init__(self):
        axes = "".join(self.axes).upper()
        if len(axes) != self.n_qubits:
            raise ValueError(f"{len(axes)} axes given for {self.n_qubits} qubits")
        if set(axes) - set(AXES):
            raise ValueError(f"invalid axis letters in {axes!r}")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def from_sites(cls, n, sites):
        """Build from a {site (1-based): axis} mapping."""
        chars = ["I"] * n
        for site, axis in sites.items():
            if not 1 <= site <= n:
                raise SiteOutOfRange(f"site {site} outside 1..{n}")
            chars[site - 1] = axis
        return cls(n, "".join(chars))

    @property
    def weight(self):
        return sum(a != "I" for a in self.axes)

    def sites(self):
        return {i + 1: a for i, a in enumerate(self.axes) if a != "I"}

    def __str__(self):
        return " ".join(f"{a}{s}" for s, a in self.sites().items())


def pauli_matrix(s):
    """Dense 2**n matrix of a Pauli string, qubit 1 as the leftmost factor."""
    n = s.n_qubits
    if n > MAX_QUBITS:
        raise DimensionTooLarge(f"{n} qubits exceeds the limit of {MAX_QUBITS}")
    if n <= _CACHE_MAX_QUBITS:
        return _cached_pauli_matrix(s.axes).copy()
    return _build_pauli_matrix(s.axes)


_CACHE_MAX_QUBITS = 6


@lru_cache(maxsize=4096)
def _cached_pauli_matrix(axes):
    return _build_pauli_matrix(axes)


def _build_pauli_matrix(axes):
    n = len(axes)
    dim = 2**n
    idx = np.arange(dim)
    flip = 0
    phase = np.ones(dim, dtype=complex)
    for q, axis in enumerate(axes):
        bit = n - 1 - q
        b = (idx >> bit) & 1
        sign = 1 - 2 * b
        if axis == "X":
            flip |= 1 << bit
        elif axis == "Y":
            # Y|0> = i|1>, Y|1> = -i|0>
            flip |= 1 << bit
            phase = phase * (1j * sign)
        elif axis == "Z":
            phase = phase * sign
    out = np.zeros((dim, dim), dtype=complex)
    out[idx ^ flip, idx] = phase
    return out


@dataclass(frozen=True)
class Coefficient:
    """Affine coefficient ``const + sum(weight * param)``."""

    const: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def is_constant(self):
        return not self.params

    @property
    def is_zero(self):
        return self.const == 0 and all(w == 0 for w in self.params.values())

    def evaluate(self, binding):
        value = self.const
        for name, w in self.params.items():
            if name not in binding:
                raise UnboundParameter(f"parameter {name!r} is not bound")
            value += w * float(binding[name])
        return value

    def __add__(self, other):
        params = dict(self.params)
        for name, w in other.params.items():
            params[name] = params.get(name, 0.0) + w
        return Coefficient(self.const + other.const, params)

    def scale(self, factor):
        return Coefficient(
            self.const * factor, {k: w * factor for k, w in self.params.items()}
        )

    def __mul__(self, other):
        if other.is_constant:
            return self.scale(other.const)
        if self.is_constant:
            return other.scale(self.const)
        raise ValueError("product of two parameter-dependent coefficients")


@dataclass(frozen=True)
class HamiltonianTerm:
    coefficient: Coefficient
    string: PauliString


@dataclass(frozen=True)
class ParamHamiltonian:
    n_qubits: int
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if t.string.n_qubits != self.n_qubits:
                raise ValueError("term qubit count differs from the Hamiltonian's")

    @property
    def parameters(self):
        names = []
        for t in self.terms:
            for name in t.coefficient.params:
                if name not in names:
                    names.append(name)
        return names

    def to_json(self):
        return {
            "n": self.n_qubits,
            "terms": [
                {
                    "const": t.coefficient.const,
                    "params": dict(t.coefficient.params),
                    "axes": t.string.axes,
                }
                for t in self.terms
            ],
        }

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        n = int(obj["n"])
        terms = [
            HamiltonianTerm(
                Coefficient(float(t["const"]), {k: float(v) for k, v in t["params"].items()}),
                PauliString(n, t["axes"]),
            )
            for t in obj["terms"]
        ]
        return cls(n, terms)

    def render(self):
        return render(self)


def max_body_size(h):
    return max((t.string.weight for t in h.terms if not t.coefficient.is_zero), default=0)


def assemble(h, binding=None):
    """Dense matrix of ``h`` with parameters taken from ``binding``."""
    binding = binding or {}
    if h.n_qubits > MAX_QUBITS:
        raise DimensionTooLarge(f"{h.n_qubits} qubits exceeds the limit of {MAX_QUBITS}")
    dim = 2**h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        c = t.coefficient.evaluate(binding)
        if c != 0:
            out += c * pauli_matrix(t.string)
    return out


def split_affine(h, vary, fixed=None):
    """Return (A, B) with H(vary=t) = A + t*B at the other ``fixed`` values."""
    fixed = dict(fixed or {})
    fixed.pop(vary, None)
    dim = 2**h.n_qubits
    a = np.zeros((dim, dim), dtype=complex)
    b = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        coef = t.coefficient
        rest = Coefficient(coef.const, {k: w for k, w in coef.params.items() if k != vary})
        ca = rest.evaluate(fixed)
        cb = coef.params.get(vary, 0.0)
        if ca == 0 and cb == 0:
            continue
        p = pauli_matrix(t.string)
        if ca != 0:
            a += ca * p
        if cb != 0:
            b += cb * p
    return a, b


# --------------------------------------------------------------------------
# text format

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*()=;])
    """,
    re.VERBOSE,
)
_FACTOR_RE = re.compile(r"([XYZ])(\d+)$")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise HamiltonianSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        value = m.group()
        if kind == "ident" and _FACTOR_RE.match(value):
            kind = "factor"
        elif kind == "ident" and re.match(r"[XYZ]\d", value):
            # e.g. "X1X2": factors must be separated by whitespace
            raise HamiltonianSyntaxError(f"malformed monomial {value!r}", pos, ["Pauli factor"])
        if kind != "ws":
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    # Intermediate values are lists of (Coefficient, {site: axis}) products.

    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = None

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind, value=None, expected=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = expected or [value or kind]
            got = tok[1] or "end of input"
            raise HamiltonianSyntaxError(f"unexpected {got!r}", tok[2], want)
        self.i += 1
        return tok

    def program(self):
        self.take("ident", "n", ["'n'"])
        self.take("op", "=", ["'='"])
        tok = self.take("number", expected=["integer"])
        if not tok[1].isdigit() or int(tok[1]) < 1:
            raise HamiltonianSyntaxError("qubit count must be a positive integer", tok[2])
        self.n = int(tok[1])
        self.take("op", ";", ["';'"])
        if self.peek()[0] == "eof":
            products = []
        else:
            products = self.expr()
        self.take("eof", expected=["'+'", "'-'", "end of input"])
        terms = [
            HamiltonianTerm(c, PauliString.from_sites(self.n, sites))
            for c, sites in products
        ]
        return ParamHamiltonian(self.n, terms)

    def expr(self):
        sign = 1.0
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.i += 1
            sign = -1.0 if tok[1] == "-" else 1.0
        out = self._signed(self.term(), sign)
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1.0 if self.take("op")[1] == "-" else 1.0
            out += self._signed(self.term(), sign)
        return out

    @staticmethod
    def _signed(products, sign):
        if sign == 1.0:
            return products
        return [(c.scale(-1.0), s) for c, s in products]

    def _starts_item(self, tok):
        return tok[0] in ("number", "ident", "factor") or tok[:2] == ("op", "(")

    def term(self):
        out = self.item()
        while True:
            tok = self.peek()
            if tok[:2] == ("op", "*"):
                self.i += 1
                out = self._multiply(out, self.item(), tok[2])
            elif self._starts_item(tok):
                out = self._multiply(out, self.item(), tok[2])
            else:
                return out

    def item(self):
        kind, value, pos = self.peek()
        expected = ["number", "parameter", "Pauli factor", "'('"]
        if kind == "number":
            self.i += 1
            return [(Coefficient(float(value)), {})]
        if kind == "factor":
            self.i += 1
            axis, site = _FACTOR_RE.match(value).groups()
            site = int(site)
            if not 1 <= site <= self.n:
                raise SiteOutOfRange(f"site {site} in {value!r} outside 1..{self.n} (position {pos})")
            return [(Coefficient(1.0), {site: axis})]
        if kind == "ident":
            self.i += 1
            return [(Coefficient(0.0, {value: 1.0}), {})]
        if (kind, value) == ("op", "("):
            self.i += 1
            inner = self.expr()
            self.take("op", ")", ["')'", "'+'", "'-'"])
            if all(not sites for _, sites in inner):
                total = Coefficient()
                for c, _ in inner:
                    total = total + c
                return [(total, {})]
            return inner
        raise HamiltonianSyntaxError(f"unexpected {value or 'end of input'!r}", pos, expected)

    def _multiply(self, left, right, pos):
        out = []
        for cl, sl in left:
            for cr, sr in right:
                shared = set(sl) & set(sr)
                if shared:
                    site = min(shared)
                    raise DuplicateAxisOnSite(
                        f"two operators on site {site} in one monomial (position {pos})"
                    )
                try:
                    coef = cl * cr
                except ValueError:
                    raise HamiltonianSyntaxError(
                        "coefficient is not affine in the parameters", pos
                    ) from None
                out.append((coef, {**sl, **sr}))
        return out


def parse_hamiltonian(text):
    """Parse a Hamiltonian program into a :class:`ParamHamiltonian`."""
    return _Parser(text).program()


def _num(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite coefficient {x}")
    if x == 0:
        return "0"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _render_term(term):
    """Return (sign, body) for one term."""
    coef = term.coefficient
    mono = str(term.string)
    if coef.is_constant:
        c = coef.const
        sign = "-" if math.copysign(1.0, c) < 0 and c != 0 else "+"
        mag = abs(c)
        if not mono:
            return sign, _num(mag)
        return sign, mono if mag == 1 else f"{_num(mag)}*{mono}"
    if coef.const == 0 and len(coef.params) == 1:
        (name, w), = coef.params.items()
        sign = "-" if w < 0 else "+"
        mag = abs(w)
        body = name if mag == 1 else f"{_num(mag)}*{name}"
        return sign, f"{body}*{mono}" if mono else body
    pieces = [_num(coef.const)] if coef.const != 0 else []
    for name, w in coef.params.items():
        op = "-" if w < 0 else "+"
        text = f"{name}" if abs(w) == 1 else f"{_num(abs(w))}*{name}"
        if pieces:
            pieces.append(f"{op} {text}")
        else:
            pieces.append(text if op == "+" else f"-{text}")
    group = "(" + " ".join(pieces) + ")"
    return "+", f"{group}*{mono}" if mono else group


def render(h):
    """Canonical program text; reparses to the same term list."""
    out = f"n={h.n_qubits};"
    for i, term in enumerate(h.terms):
        sign, body = _render_term(term)
        if i == 0:
            out += f" {body}" if sign == "+" else f" - {body}"
        else:
            out += f" {sign} {body}"
    return out
