"""Spectral analysis drivers built on the dense eigensolver.

Degeneracy searches exploit the fact that a tracked exact eigenvector splits
H into its own 1x1 block and the block on the orthogonal complement, so the
"other" levels are the spectrum of that complement block and every gap is a
continuous function of the swept parameter.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.linalg import null_space

from . import hamlib
from .errors import DimensionMismatch, TrackedNotEigenstate, UnboundParameter
from .linalg import DEFAULT_CLUSTER_TOL, cluster_eigenvalues, eigvals_hermitian
from .pauli import assemble, split_affine
from .qstate import StateVector, balanced_bipartitions, ghz, w_state

TOL_RESIDUAL = 1e-9
TOL_X = 1e-8
TOL_GRAD = 1e-7
SCAN_POINTS = 401


def resolve_workers(workers=None):
    """Thread count: explicit value, else ENTSPEC_THREADS (0 = auto), else auto."""
    if workers is None:
        workers = int(os.environ.get("ENTSPEC_THREADS", "0") or 0)
    if workers <= 0:
        workers = min(8, os.cpu_count() or 1)
    return workers


def _ordered_map(fn, items, workers):
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class EigenstateReport:
    is_eigenstate: bool
    rayleigh: float
    residual: float
    cluster_size: int
    level_index: int
    # eigenvalues strictly below the matched cluster, counted with multiplicity
    states_below: int

    def to_json(self):
        return {
            "is_eigenstate": self.is_eigenstate,
            "rayleigh": self.rayleigh,
            "residual": self.residual,
            "cluster_size": self.cluster_size,
            "level_index": self.level_index,
            "states_below": self.states_below,
        }


def _vec(psi):
    return psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)


def _report(h_matrix, psi, eigenvalues, tol_residual, tol_cluster):
    hv = h_matrix @ psi
    rayleigh = float(np.vdot(psi, hv).real)
    residual = float(np.linalg.norm(hv - rayleigh * psi))
    clusters = cluster_eigenvalues(eigenvalues, tol_cluster)
    is_eig = residual <= tol_residual
    matched = None
    if is_eig:
        distance = [np.min(np.abs(eigenvalues[c.start:c.start + c.count] - rayleigh)) for c in clusters]
        best = int(np.argmin(distance))
        if distance[best] <= tol_cluster:
            matched = best
    if matched is not None:
        c = clusters[matched]
        return EigenstateReport(True, rayleigh, residual, c.count, matched, c.start)
    below = [c for c in clusters if c.value < rayleigh - tol_cluster]
    below_count = sum(c.count for c in below)
    return EigenstateReport(False, rayleigh, residual, 0, len(below), below_count)


def verify_eigenstate(h, psi, tol_residual=TOL_RESIDUAL, tol_cluster=DEFAULT_CLUSTER_TOL):
    """Check whether ``psi`` is an eigenvector of ``h`` and locate its level.

    ``level_index`` counts distinct eigenvalue clusters strictly below the
    cluster that contains the Rayleigh quotient, so 0 is the ground level
    and 1 the first excited level even if the ground level is degenerate.
    """
    if tol_residual <= 0 or tol_cluster <= 0:
        raise ValueError("tolerances must be positive")
    h = np.asarray(h, dtype=complex)
    v = _vec(psi)
    if h.shape != (v.size, v.size):
        raise DimensionMismatch(f"matrix {h.shape} vs state of length {v.size}")
    return _report(h, v, eigvals_hermitian(h), tol_residual, tol_cluster)


def level_rank_profile(h, binding, tracked, tol_residual=TOL_RESIDUAL, tol_cluster=DEFAULT_CLUSTER_TOL):
    return verify_eigenstate(assemble(h, binding), tracked, tol_residual, tol_cluster)


@dataclass
class SweepResult:
    parameter: str
    grid: np.ndarray
    spectra: np.ndarray
    tracked_reports: list = None


def _check_bound(h, vary, fixed):
    missing = [p for p in h.parameters if p != vary and p not in fixed]
    if missing:
        raise UnboundParameter(f"parameters {missing} are not bound")


def sweep(h, vary, fixed, grid, tracked=None, tol_residual=TOL_RESIDUAL,
          tol_cluster=DEFAULT_CLUSTER_TOL, workers=None):
    """Full spectrum of ``h`` at every point of ``grid`` for parameter ``vary``."""
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ValueError("grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    fixed = dict(fixed or {})
    _check_bound(h, vary, fixed)
    a, b = split_affine(h, vary, fixed)
    v = None if tracked is None else _vec(tracked)

    def point(t):
        m = a + t * b
        vals = eigvals_hermitian(m)
        rep = None if v is None else _report(m, v, vals, tol_residual, tol_cluster)
        return vals, rep

    results = _ordered_map(point, grid, workers)
    spectra = np.array([r[0] for r in results])
    reports = None if v is None else [r[1] for r in results]
    return SweepResult(vary, grid, spectra, reports)


class _ComplementPencil:
    """Levels of A + tB other than the one carried by an exact eigenvector psi."""

    def __init__(self, a, b, psi):
        q = null_space(psi.conj()[None, :])
        self.a = q.conj().T @ a @ q
        self.b = q.conj().T @ b @ q
        self.ra = float(np.vdot(psi, a @ psi).real)
        self.rb = float(np.vdot(psi, b @ psi).real)

    def rayleigh(self, t):
        return self.ra + t * self.rb

    def gaps(self, t):
        """Sorted other levels minus the tracked level (signed)."""
        return np.linalg.eigvalsh(self.a + t * self.b) - self.rayleigh(t)


def _assert_tracked(a, b, psi, points):
    for t in points:
        m = a + t * b
        hv = m @ psi
        r = np.vdot(psi, hv)
        res = np.linalg.norm(hv - r * psi)
        if res > TOL_RESIDUAL * max(1.0, np.linalg.norm(m)):
            raise TrackedNotEigenstate(f"tracked state is not an eigenstate at {t} (residual {res:.3e})")


def _dedupe(points, tol):
    out = []
    for p in sorted(points):
        if out and p - out[-1] <= tol:
            continue
        out.append(p)
    return out


def _gap_zeros(pencil, lo, hi, tol_x, scan_points, tol_gap, workers=None):
    grid = np.linspace(lo, hi, max(scan_points, 2))
    gaps = np.array(_ordered_map(pencil.gaps, grid, workers))
    roots = []
    for j in range(gaps.shape[1]):
        g = gaps[:, j]
        absg = np.abs(g)

        def gj(t, j=j):
            return pencil.gaps(t)[j]

        roots.extend(grid[absg == 0.0])
        for i in np.flatnonzero(g[:-1] * g[1:] < 0):
            roots.append(optimize.brentq(gj, grid[i], grid[i + 1], xtol=tol_x, rtol=4 * np.finfo(float).eps))
        # touching zeros (the gap returns to one sign): local minima of |gap|
        for i in range(1, len(grid) - 1):
            if not (absg[i] <= absg[i - 1] and absg[i] <= absg[i + 1] and absg[i] > 0):
                continue
            if g[i - 1] * g[i] < 0 or g[i] * g[i + 1] < 0:
                continue
            # a touch within one step has |gap| of the order of its local variation;
            # flat or distant levels are skipped
            variation = max(absg[i - 1] - absg[i], absg[i + 1] - absg[i])
            if absg[i] > 2 * variation + tol_gap:
                continue
            res = optimize.minimize_scalar(
                lambda t: abs(gj(t)), bounds=(grid[i - 1], grid[i + 1]),
                method="bounded", options={"xatol": tol_x},
            )
            if res.fun <= tol_gap:
                roots.append(float(res.x))
    return roots


def find_degeneracy_points(h, vary, fixed, interval, tracked, tol_x=TOL_X,
                           scan_points=SCAN_POINTS, tol_gap=1e-7, workers=None):
    """Parameter values in ``interval`` where the tracked level meets another level.

    Sign changes of each gap on a dense scan are refined by Brent's method;
    tangential touches are found by bounded minimization of |gap| and kept
    when the minimum is below ``tol_gap``.  Results closer than ``10*tol_x``
    are merged.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError("interval must satisfy a < b")
    fixed = dict(fixed or {})
    _check_bound(h, vary, fixed)
    a, b = split_affine(h, vary, fixed)
    psi = _vec(tracked)
    _assert_tracked(a, b, psi, (lo, 0.5 * (lo + hi), hi))
    pencil = _ComplementPencil(a, b, psi)
    roots = _gap_zeros(pencil, lo, hi, tol_x, scan_points, tol_gap, workers)
    return [float(r) for r in _dedupe(roots, 10 * tol_x)]


def ghz_crossings(n, interval, tol_x=TOL_X, scan_points=SCAN_POINTS, workers=None):
    """lambda values in ``interval`` where G+ is degenerate in the GHZ family."""
    h = hamlib.build_ghz_family(n)
    return find_degeneracy_points(h, "lambda", {}, interval, ghz(n, +1), tol_x,
                                  scan_points=scan_points, workers=workers)


def ghz_crossings_closed_form(n, interval):
    """+-2m and +-2 sqrt(m(m+1)) for m = 0..n//2, restricted to ``interval``."""
    lo, hi = interval
    vals = set()
    for m in range(n // 2 + 1):
        for v in (2 * m, 2 * math.sqrt(m * (m + 1))):
            vals.update((v, -v))
    return sorted(v for v in vals if lo <= v <= hi)


def ghz_ground_energy(n, lam):
    return -n - 2 * (math.sqrt(1 + lam * lam) - 1)


@dataclass(frozen=True)
class GroundRange:
    lo: float
    hi: float
    found: bool

    def to_json(self):
        return {"lo": self.lo, "hi": self.hi, "found": self.found}


def w_ground_range(n, b_interval=(-4.0, 1.0), tol=1e-10, scan_points=SCAN_POINTS,
                   tol_cluster=DEFAULT_CLUSTER_TOL, workers=None):
    """Widest b-interval on which W_n is the nondegenerate ground state of the XX ring.

    The margin f(b) = (lowest other level) - (W energy) is continuous; the
    interval is a maximal run of scan points with f > tol_cluster whose ends
    are refined to roots of f.
    """
    if not 3 <= n <= 10:
        raise ValueError("n must lie in 3..10")
    lo, hi = map(float, b_interval)
    h = hamlib.build_w_xx(n)
    a, b = split_affine(h, "b", {})
    pencil = _ComplementPencil(a, b, w_state(n).amplitudes)

    def margin(t):
        return pencil.gaps(t)[0]

    grid = np.linspace(lo, hi, max(scan_points, 2))
    f = np.array(_ordered_map(margin, grid, workers))
    good = f > tol_cluster
    if not good.any():
        return GroundRange(math.nan, math.nan, False)
    runs, start = [], None
    for i, g in enumerate(good):
        if g and start is None:
            start = i
        if not g and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(grid) - 1))
    i0, i1 = max(runs, key=lambda r: grid[r[1]] - grid[r[0]])

    def edge(inside, step):
        # first scan point past the run with a nonpositive margin brackets the root;
        # a margin in (0, tol_cluster] means the scan sat on the degeneracy itself
        j = inside + step
        while 0 <= j < len(grid) and f[j] > 0:
            j += step
        if not 0 <= j < len(grid):
            return grid[inside + step]
        a, b = sorted((grid[inside], grid[j]))
        return optimize.brentq(margin, a, b, xtol=tol)

    left = lo if i0 == 0 else edge(i0, -1)
    right = hi if i1 == len(grid) - 1 else edge(i1, +1)
    return GroundRange(float(left), float(right), True)


# --------------------------------------------------------------------------
# pi_ME minimization


def _cut_axes(n, subset):
    rest = [q for q in range(1, n + 1) if q not in subset]
    return [q - 1 for q in subset] + [q - 1 for q in rest]


def pme_value_and_gradient(amplitudes):
    """pi_ME of an (unnormalized) amplitude vector and its real-coordinate gradient.

    Purity is extended as the quartic form ||M M^+||_F^2 of the cut matrix M.
    The gradient is returned as a complex array G such that
    d pi_ME = Re(vdot(G, d psi)), i.e. G = 4 rho_A M per cut, averaged.
    """
    psi = np.asarray(amplitudes, dtype=complex)
    n = int(round(math.log2(psi.size)))
    parts = balanced_bipartitions(n)
    tensor = psi.reshape((2,) * n)
    value = 0.0
    grad = np.zeros((2,) * n, dtype=complex)
    for part in parts:
        axes = _cut_axes(n, part.subset_a)
        m = tensor.transpose(axes).reshape(2 ** len(part.subset_a), -1)
        rho = m @ m.conj().T
        value += float(np.sum(np.abs(rho) ** 2))
        g = (4 * rho @ m).reshape((2,) * n).transpose(np.argsort(axes))
        grad += g
    return value / len(parts), grad.reshape(-1) / len(parts)


def sphere_gradient(amplitudes):
    """Gradient of pi_ME projected onto the tangent space of the unit sphere."""
    psi = np.asarray(amplitudes, dtype=complex)
    _, g = pme_value_and_gradient(psi)
    return g - np.vdot(psi, g).real * psi


@dataclass
class MinimizationResult:
    best_value: float
    best_state: StateVector
    starts: int
    converged_starts: int
    seed: int
    values: list = None

    def to_json(self):
        return {
            "best_value": self.best_value,
            "best_state": self.best_state.to_json(),
            "starts": self.starts,
            "converged_starts": self.converged_starts,
            "seed": self.seed,
            "values": list(self.values or []),
        }


def _descend(n, seed, max_iter, tol_grad):
    dim = 2**n
    rng = np.random.default_rng(seed)
    x0 = np.concatenate([rng.standard_normal(dim), rng.standard_normal(dim)])
    x0 /= np.linalg.norm(x0)

    def objective(x):
        # pi_ME is quartic, so pi_ME(x/|x|) = pi_ME(x)/|x|^4
        r2 = x @ x
        f, g = pme_value_and_gradient(x[:dim] + 1j * x[dim:])
        grad = np.concatenate([g.real, g.imag]) / r2**2 - 4 * f * x / r2**3
        return f / r2**2, grad

    res = optimize.minimize(
        objective, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": 1e-14, "ftol": 1e-15, "maxcor": 20},
    )
    x = res.x / np.linalg.norm(res.x)
    psi = x[:dim] + 1j * x[dim:]
    value, _ = pme_value_and_gradient(psi)
    gnorm = float(np.linalg.norm(sphere_gradient(psi)))
    return value, psi, gnorm <= tol_grad


def minimize_pme(n, starts=20, seed=0, max_iter=2000, tol_grad=TOL_GRAD, workers=None):
    """Multi-start local minimization of pi_ME over normalized n-qubit states.

    Start ``i`` draws its initial state from ``default_rng(seed + i)``, so the
    result does not depend on how starts are scheduled across threads.
    """
    if not 2 <= n <= 6:
        raise ValueError("n must lie in 2..6")
    if starts < 1:
        raise ValueError("need at least one start")
    runs = _ordered_map(lambda i: _descend(n, seed + i, max_iter, tol_grad), range(starts), workers)
    values = [r[0] for r in runs]
    best = int(np.argmin(values))
    best_value = float(values[best])
    psi = runs[best][1]
    state = StateVector(n, psi / np.linalg.norm(psi))
    return MinimizationResult(best_value, state, starts, sum(r[2] for r in runs), seed, values)
