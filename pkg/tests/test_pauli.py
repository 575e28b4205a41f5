import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entspec.errors import (
    DimensionTooLarge,
    DuplicateAxisOnSite,
    HamiltonianSyntaxError,
    SiteOutOfRange,
    UnboundParameter,
)
from entspec.hamlib import GOLDEN_FILES, build_h3
from entspec.pauli import (
    Coefficient,
    HamiltonianTerm,
    ParamHamiltonian,
    PauliString,
    assemble,
    max_body_size,
    parse_hamiltonian,
    pauli_matrix,
    render,
    split_affine,
)

from oracles import kron_pauli, kron_sum


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_matrix_matches_kron_for_all_strings(n):
    for axes in itertools.product("IXYZ", repeat=n):
        axes = "".join(axes)
        np.testing.assert_array_equal(pauli_matrix(PauliString(n, axes)), kron_pauli(axes))


def test_pauli_matrix_random_longer_strings(rng):
    for n in (4, 5, 7):
        for _ in range(5):
            axes = "".join(rng.choice(list("IXYZ"), n))
            np.testing.assert_array_equal(pauli_matrix(PauliString(n, axes)), kron_pauli(axes))


def test_pauli_matrix_examples():
    x1 = pauli_matrix(PauliString.from_sites(2, {1: "X"}))
    np.testing.assert_array_equal(x1, np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]]))
    zz = pauli_matrix(PauliString.from_sites(2, {1: "Z", 2: "Z"}))
    assert zz[1, 1] == -1
    assert PauliString.from_sites(3, {2: "Y", 3: "Z"}).axes == "IYZ"


def test_pauli_matrix_cache_returns_copies():
    s = PauliString(2, "XZ")
    m = pauli_matrix(s)
    m[:] = 0
    assert np.abs(pauli_matrix(s)).sum() == 4


def test_pauli_string_errors():
    with pytest.raises(SiteOutOfRange):
        PauliString.from_sites(3, {4: "X"})
    with pytest.raises(ValueError):
        PauliString(2, "XQ")
    with pytest.raises(DimensionTooLarge):
        pauli_matrix(PauliString(13, "X" * 13))


def test_pauli_string_text():
    s = PauliString(4, "XIZY")
    assert str(s) == "X1 Z3 Y4"
    assert s.weight == 3
    assert list(s.sites()) == [1, 3, 4]


# --- coefficients and assembly ----------------------------------------------


def test_coefficient_algebra():
    c = Coefficient(1.0, {"J": 2.0}) + Coefficient(0.5, {"J": -1.0, "k": 1.0})
    assert c.evaluate({"J": 3, "k": 4}) == pytest.approx(1.5 + 3 + 4)
    assert (c * Coefficient(2.0)).evaluate({"J": 1, "k": 0}) == pytest.approx(5)
    with pytest.raises(ValueError):
        Coefficient(0, {"J": 1}) * Coefficient(0, {"k": 1})
    with pytest.raises(UnboundParameter):
        Coefficient(0, {"J": 1}).evaluate({})
    assert Coefficient().is_zero and Coefficient(0, {"J": 0.0}).is_zero


def test_assemble_h3_against_kron_sum():
    J, k = 0.7, -1.3
    terms = [(J, {a: "Z", b: "Z"}) for a, b in [(1, 2), (2, 3), (3, 1)]]
    terms += [(k, {a: "X", b: "X"}) for a, b in [(1, 2), (2, 3), (3, 1)]]
    terms += [(-k, {q: "X"}) for q in (1, 2, 3)]
    np.testing.assert_allclose(assemble(build_h3(), {"J": J, "k": k}), kron_sum(3, terms), atol=1e-13)


def test_assemble_unbound_parameter():
    with pytest.raises(UnboundParameter):
        assemble(build_h3(), {"J": 1.0})


@pytest.mark.parametrize("name", sorted(k for k in GOLDEN_FILES if not k.startswith("ising0")))
def test_linearity_in_parameters(rng, name):
    h = parse_hamiltonian(GOLDEN_FILES[name])
    params = h.parameters
    u = dict(zip(params, rng.standard_normal(len(params))))
    v = dict(zip(params, rng.standard_normal(len(params))))
    a, b = rng.standard_normal(2)
    zero = {p: 0.0 for p in params}
    h0 = assemble(h, zero)
    lhs = assemble(h, {p: a * u[p] + b * v[p] for p in params}) - h0
    rhs = a * (assemble(h, u) - h0) + b * (assemble(h, v) - h0)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(lhs))


def test_split_affine():
    h = build_h3()
    a, b = split_affine(h, "k", {"J": 0.4})
    for t in (-1.0, 0.3, 2.0):
        np.testing.assert_allclose(a + t * b, assemble(h, {"J": 0.4, "k": t}), atol=1e-14)


def test_max_body_size():
    assert max_body_size(build_h3()) == 2
    assert max_body_size(parse_hamiltonian("n=4; X1 Y2 Z4 + Z1")) == 3
    assert max_body_size(parse_hamiltonian("n=4; 0*X1 X2 X3 X4 + Z1")) == 1


def test_hamiltonian_json_round_trip():
    h = build_h3()
    back = ParamHamiltonian.from_json(json.dumps(h.to_json()))
    assert back == h


# --- parser -----------------------------------------------------------------


def test_parse_h3_example():
    h = parse_hamiltonian("n=3; J*(Z1 Z2 + Z2 Z3 + Z3 Z1) + k*(X1 X2 + X2 X3 + X3 X1 - X1 - X2 - X3)")
    assert h.n_qubits == 3
    assert len(h.terms) == 9
    assert h.parameters == ["J", "k"]
    assert h.terms[-1].coefficient == Coefficient(0.0, {"k": -1.0})


def test_parse_constant_coefficient():
    (term,) = parse_hamiltonian("n=2; 0.5*Z1").terms
    assert term.coefficient.is_constant and term.coefficient.const == 0.5
    assert term.string.axes == "ZI"


def test_parse_comments_and_whitespace():
    h = parse_hamiltonian("# header\nn=2;\n  X1 X2  # bond\n + 2 * Z2\n")
    assert [t.string.axes for t in h.terms] == ["XX", "IZ"]


def test_parse_errors():
    with pytest.raises(SiteOutOfRange):
        parse_hamiltonian("n=2; X3")
    with pytest.raises(DuplicateAxisOnSite):
        parse_hamiltonian("n=2; X1 X1")
    with pytest.raises(HamiltonianSyntaxError) as err:
        parse_hamiltonian("n=2; X1 +")
    assert err.value.position == 9
    assert "Pauli factor" in err.value.expected
    with pytest.raises(HamiltonianSyntaxError):
        parse_hamiltonian("n=2; J*k*X1")
    with pytest.raises(HamiltonianSyntaxError):
        parse_hamiltonian("n=2; X1X2")
    with pytest.raises(HamiltonianSyntaxError):
        parse_hamiltonian("n=0; X1")


@pytest.mark.parametrize("name", sorted(GOLDEN_FILES))
def test_render_parse_round_trip_corpus(name):
    h = parse_hamiltonian(GOLDEN_FILES[name])
    again = parse_hamiltonian(render(h))
    assert again == h
    assert render(again) == render(h)


_weights = st.sampled_from([1.0, -1.0, 2.0, -0.5, 0.25, 1.5, -3.0, 0.1])
_consts = st.sampled_from([0.0, 1.0, -1.0, 0.5, -2.25, 3.0, 1e-3])


@st.composite
def _hamiltonians(draw):
    n = draw(st.integers(1, 4))
    terms = []
    for _ in range(draw(st.integers(1, 6))):
        axes = "".join(draw(st.lists(st.sampled_from("IXYZ"), min_size=n, max_size=n)))
        names = draw(st.lists(st.sampled_from(["J", "k", "b", "lambda"]), unique=True, max_size=2))
        params = {name: draw(_weights) for name in names}
        const = draw(_consts) if params else draw(_weights)
        terms.append(HamiltonianTerm(Coefficient(const, params), PauliString(n, axes)))
    return ParamHamiltonian(n, terms)


@settings(max_examples=200, deadline=None)
@given(_hamiltonians())
def test_render_parse_round_trip_generated(h):
    again = parse_hamiltonian(render(h))
    assert again == h
