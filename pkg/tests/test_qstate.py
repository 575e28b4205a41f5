import json
import math

import numpy as np
import pytest

from entspec import qstate
from entspec.errors import IndexOutOfRange, LengthMismatch
from entspec.qstate import (
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
    random_state,
    rdms_equal,
    w_state,
)

from oracles import brute_partial_trace

S = 1 / math.sqrt(2)


@pytest.mark.parametrize(
    "n, bits, index",
    [(3, "000", 0), (3, "111", 7), (4, "0001", 1), (4, [1, 0, 0, 0], 8)],
)
def test_basis_state(n, bits, index):
    amps = basis_state(n, bits).amplitudes
    assert amps[index] == 1
    assert np.count_nonzero(amps) == 1


def test_basis_state_length_mismatch():
    with pytest.raises(LengthMismatch):
        basis_state(3, "01")


def test_ghz():
    a = ghz(3, +1).amplitudes
    assert a[0] == pytest.approx(S) and a[7] == pytest.approx(S)
    b = ghz(5, -1).amplitudes
    assert b[0] == pytest.approx(S) and b[31] == pytest.approx(-S)
    assert np.count_nonzero(b) == 2
    assert purity(ghz(2), [1]) == pytest.approx(0.5)


def test_w_state():
    a = w_state(3).amplitudes
    np.testing.assert_allclose(np.flatnonzero(a), [1, 2, 4])
    np.testing.assert_allclose(a[[1, 2, 4]], 1 / math.sqrt(3))
    np.testing.assert_allclose(np.flatnonzero(w_state(2).amplitudes), [1, 2])
    for q in range(1, 5):
        rho = partial_trace(w_state(4), [q]).matrix
        np.testing.assert_allclose(rho, np.diag([0.75, 0.25]), atol=1e-14)


def test_zeta_checksums():
    assert len(qstate.ZETA4) == 16 and sum(qstate.ZETA4) == 4
    assert len(qstate.ZETA5) == 32 and sum(qstate.ZETA5) == 8


def test_mmes_amplitudes():
    assert mmes4().amplitudes[6] == pytest.approx(-0.25)
    assert mmes4_reflected().amplitudes[0] == pytest.approx(-0.25)
    np.testing.assert_allclose(mmes4_reflected().amplitudes, mmes4().amplitudes[::-1])
    assert np.linalg.norm(mmes5().amplitudes) == pytest.approx(1, abs=1e-14)
    np.testing.assert_allclose(np.abs(mmes5().amplitudes), 1 / math.sqrt(32))


def test_mmes5_is_perfect_on_every_balanced_cut():
    # a transcription error in the coefficient table would break at least one cut
    for part in balanced_bipartitions(5):
        assert purity(mmes5(), part) == pytest.approx(0.25, abs=1e-12), part


def test_mmes4_cut_purities():
    got = {p.subset_a: purity(mmes4(), p) for p in balanced_bipartitions(4)}
    assert got[(1, 2)] == pytest.approx(0.25)
    assert got[(1, 3)] == pytest.approx(0.25)
    assert got[(1, 4)] == pytest.approx(0.5)
    assert purity(mmes4(), [2, 3]) == pytest.approx(0.5)


def test_partial_trace_ghz_tail():
    for n in (3, 4, 5):
        rho = partial_trace(ghz(n), list(range(2, n + 1))).matrix
        expected = np.zeros((2 ** (n - 1),) * 2)
        expected[0, 0] = expected[-1, -1] = 0.5
        np.testing.assert_allclose(rho, expected, atol=1e-14)


def test_partial_trace_product_state():
    rho = partial_trace(basis_state(2, "00"), [1]).matrix
    np.testing.assert_allclose(rho, [[1, 0], [0, 0]])


def test_partial_trace_mmes4_pair():
    dm = partial_trace(mmes4(), [1, 4]).validate()
    assert dm.purity() == pytest.approx(0.5)


def test_partial_trace_index_errors():
    with pytest.raises(IndexOutOfRange):
        partial_trace(ghz(3), [4])
    with pytest.raises(IndexOutOfRange):
        partial_trace(ghz(3), [0])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_partial_trace_matches_brute_force(rng, n):
    import itertools

    psi = random_state(n, rng)
    for k in range(1, n):
        for keep in itertools.combinations(range(1, n + 1), k):
            np.testing.assert_allclose(
                partial_trace(psi, keep).matrix,
                brute_partial_trace(psi.amplitudes, n, keep),
                atol=1e-13,
            )


def test_purity_examples():
    for part in balanced_bipartitions(4):
        assert purity(ghz(4), part) == pytest.approx(0.5)
        assert purity(basis_state(4, "0000"), part) == pytest.approx(1.0)
    assert purity(w_state(3), [1]) == pytest.approx(5 / 9)


def test_pme_examples():
    assert pme(ghz(3)) == pytest.approx(0.5, abs=1e-12)
    assert pme(mmes4()) == pytest.approx(1 / 3, abs=1e-12)
    assert pme(mmes5()) == pytest.approx(0.25, abs=1e-12)


def test_balanced_bipartitions():
    assert [p.subset_a for p in balanced_bipartitions(3)] == [(1,), (2,), (3,)]
    assert len(balanced_bipartitions(4)) == 6
    assert len(balanced_bipartitions(5)) == 10
    assert all(len(p.subset_a) == 2 and p.balanced for p in balanced_bipartitions(5))


def test_rdms_equal_examples():
    for n in (3, 4, 5):
        for k in range(1, n):
            assert rdms_equal(ghz(n, 1), ghz(n, -1), k)
    assert not rdms_equal(basis_state(3, "000"), basis_state(3, "001"), 1)


def test_bipartition_validation():
    with pytest.raises(ValueError):
        Bipartition(3, ())
    with pytest.raises(ValueError):
        Bipartition(3, (1, 2, 3))
    assert Bipartition(4, (3, 1)).subset_a == (1, 3)
    assert Bipartition(4, (1, 3)).complement == (2, 4)


def test_state_json_round_trip(rng):
    psi = random_state(3, rng)
    text = json.dumps(psi.to_json())
    back = StateVector.from_json(text)
    np.testing.assert_array_equal(back.amplitudes, psi.amplitudes)
    assert json.loads(text)["n"] == 3


def test_state_rejects_unnormalized():
    with pytest.raises(ValueError):
        StateVector(1, [1, 1])
    assert StateVector.from_amplitudes([1, 1]).amplitudes[0] == pytest.approx(S)


# --- ensemble properties ---------------------------------------------------


def _all_parts(n):
    import itertools

    return [c for k in range(1, n) for c in itertools.combinations(range(1, n + 1), k)]


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_purity_and_pme_bounds_random_ensemble(rng, n):
    lo_pme = 2.0 ** -(n // 2)
    parts = [Bipartition(n, c) for c in _all_parts(n)]
    for _ in range(1000):
        psi = random_state(n, rng)
        for p in parts:
            pa = purity(psi, p)
            na = min(len(p.subset_a), n - len(p.subset_a))
            assert 2.0**-na - 1e-10 <= pa <= 1 + 1e-10
        assert lo_pme - 1e-10 <= pme(psi) <= 1 + 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_complement_symmetry_and_density_invariants(rng, n):
    for _ in range(50):
        psi = random_state(n, rng)
        for c in _all_parts(n):
            part = Bipartition(n, c)
            assert purity(psi, part) == pytest.approx(purity(psi, part.complement), abs=1e-10)
            partial_trace(psi, part).validate()


def _random_unitary(rng):
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_local_unitary_invariance(rng, n):
    from functools import reduce

    for _ in range(20):
        psi = random_state(n, rng)
        u = reduce(np.kron, [_random_unitary(rng) for _ in range(n)])
        phi = StateVector(n, u @ psi.amplitudes)
        for c in _all_parts(n):
            assert purity(phi, c) == pytest.approx(purity(psi, c), abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_rdms_equal_reflexive(rng, n):
    psi = random_state(n, rng)
    assert all(rdms_equal(psi, psi, k) for k in range(1, n))
