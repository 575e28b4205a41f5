"""Spectra, eigenstate ranks and entanglement of small qubit Hamiltonians.

Exit status: 0 on success, 1 on a domain error (a JSON object describing it is
written to stderr), 2 on a usage error.
"""
import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, hamlib, qstate
from .errors import EntspecError
from .linalg import DEFAULT_CLUSTER_TOL, cluster_eigenvalues, eig_hermitian
from .pauli import assemble, max_body_size, parse_hamiltonian, render
from .validation import validate

SIG_DIGITS = 12
ZERO_SNAP = 1e-11


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# formatting


def _num(x):
    x = float(x)
    if not math.isfinite(x):
        return None
    if abs(x) < ZERO_SNAP:
        return 0.0
    return float(f"{x:.{SIG_DIGITS}g}")


def clean(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, dict):
        return {k: clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _csv_field(x):
    if x is None or x == "":
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = _num(x)
    return "" if v is None else repr(v)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_field(x) for x in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# argument resolution

_STATE_ALIASES = {"mmes3": "m3", "mmes4": "m4", "mmes4r": "m4r", "mmes5": "m5", "ghz3": "m3"}


def resolve_state(name):
    """Built-in state names: ghz+:N, ghz-:N, w:N, m3, m4, m4r, m5, basis:BITS."""
    key = name.strip().lower()
    key = _STATE_ALIASES.get(key, key)
    fixed = {
        "m3": qstate.mmes3,
        "m4": qstate.mmes4,
        "m4r": qstate.mmes4_reflected,
        "m5": qstate.mmes5,
    }
    if key in fixed:
        return fixed[key]()
    kind, _, arg = key.partition(":")
    if kind in ("ghz+", "ghz-", "w") and arg.isdigit():
        n = int(arg)
        if kind == "w":
            return qstate.w_state(n)
        return qstate.ghz(n, +1 if kind == "ghz+" else -1)
    if kind == "basis" and arg and set(arg) <= {"0", "1"}:
        return qstate.basis_state(len(arg), arg)
    raise UsageError(f"unknown state {name!r}")


def _load_state(args, attr="state"):
    name = getattr(args, attr, None)
    path = getattr(args, f"{attr}_file", None)
    if path:
        return path, qstate.StateVector.from_json(Path(path).read_text())
    if not name:
        raise UsageError(f"--{attr} or --{attr}-file is required")
    return name, resolve_state(name)


def _load_hamiltonian(args):
    if args.builtin:
        try:
            return args.builtin, hamlib.builtin_hamiltonian(args.builtin)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.file:
        return args.file, parse_hamiltonian(Path(args.file).read_text())
    raise UsageError("one of --builtin or --file is required")


def parse_bindings(items):
    binding = {}
    for item in items or []:
        for piece in item.split(","):
            name, eq, value = piece.partition("=")
            if not eq or not name.strip():
                raise UsageError(f"bad binding {piece!r}; expected NAME=VALUE")
            try:
                binding[name.strip()] = float(value)
            except ValueError:
                raise UsageError(f"bad value in binding {piece!r}") from None
    return binding


def parse_interval(text):
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"bad interval {text!r}; expected MIN:MAX") from None
    if not a < b:
        raise UsageError(f"empty interval {text!r}")
    return a, b


def parse_range(text):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected MIN:MAX:POINTS") from None
    if n < 2 or not a < b:
        raise UsageError("sweep ranges need MIN < MAX and at least 2 points")
    return np.linspace(a, b, n)


# --------------------------------------------------------------------------
# subcommands; each returns (json_object, csv_text_or_None)


def _tolerances(args):
    return dict(tol_residual=args.tol_residual, tol_cluster=args.tol_cluster)


def cmd_spectrum(args):
    name, h = _load_hamiltonian(args)
    binding = parse_bindings(args.fix)
    m = assemble(h, binding)
    vals = eig_hermitian(m).eigenvalues
    clusters = cluster_eigenvalues(vals, args.tol_cluster)
    tracked = None
    if args.track or args.track_file:
        _, psi = _load_state(args, "track")
        tracked = analysis.verify_eigenstate(m, psi, **_tolerances(args)).to_json()
    out = {
        "hamiltonian": name,
        "binding": binding,
        "eigenvalues": vals,
        "clusters": [{"start": c.start, "count": c.count, "value": c.value} for c in clusters],
        "tracked": tracked,
    }
    rows = [[i, v] for i, v in enumerate(vals)]
    return out, _csv_text(["index", "eigenvalue"], rows)


def cmd_sweep(args):
    name, h = _load_hamiltonian(args)
    fixed = parse_bindings(args.fix)
    grid = parse_range(args.range)
    psi = _load_state(args, "track")[1] if (args.track or args.track_file) else None
    res = analysis.sweep(h, args.vary, fixed, grid, psi, **_tolerances(args))
    dim = res.spectra.shape[1]
    header = ["param"] + [f"e{i}" for i in range(dim)] + [
        "tracked_rayleigh", "tracked_cluster_size", "tracked_level_index"]
    rows = []
    for i, t in enumerate(res.grid):
        rep = res.tracked_reports[i] if res.tracked_reports else None
        extra = ["", "", ""] if rep is None else [rep.rayleigh, rep.cluster_size, rep.level_index]
        rows.append([t, *res.spectra[i], *extra])
    out = {
        "hamiltonian": name,
        "parameter": args.vary,
        "fixed": fixed,
        "grid": res.grid,
        "spectra": res.spectra,
        "tracked": None if res.tracked_reports is None else [r.to_json() for r in res.tracked_reports],
    }
    return out, _csv_text(header, rows)


def cmd_degeneracies(args):
    name, h = _load_hamiltonian(args)
    fixed = parse_bindings(args.fix)
    interval = parse_interval(args.interval)
    label, psi = _load_state(args, "track")
    pts = analysis.find_degeneracy_points(h, args.vary, fixed, interval, psi, tol_x=args.tol_x)
    out = {"hamiltonian": name, "parameter": args.vary, "fixed": fixed,
           "interval": list(interval), "tracked": label, "points": pts}
    return out, _csv_text([args.vary], [[p] for p in pts])


def cmd_crossings(args):
    interval = parse_interval(args.interval)
    pts = analysis.ghz_crossings(args.n, interval, tol_x=args.tol_x)
    closed = analysis.ghz_crossings_closed_form(args.n, interval)
    match = len(pts) == len(closed) and all(abs(a - b) <= 1e-6 for a, b in zip(pts, closed))
    out = {"n": args.n, "interval": list(interval), "points": pts,
           "closed_form": closed, "match": match}
    return out, _csv_text(["lambda"], [[p] for p in pts])


def cmd_verify(args):
    name, h = _load_hamiltonian(args)
    binding = parse_bindings(args.fix)
    label, psi = _load_state(args)
    rep = analysis.verify_eigenstate(assemble(h, binding), psi, **_tolerances(args))
    return {"hamiltonian": name, "binding": binding, "state": label, **rep.to_json()}, None


def cmd_purity(args):
    label, psi = _load_state(args)
    if args.subset:
        try:
            subset = [int(q) for q in args.subset.split(",")]
        except ValueError:
            raise UsageError(f"bad subset {args.subset!r}") from None
        parts = [qstate.Bipartition(psi.n_qubits, subset)]
    else:
        parts = qstate.balanced_bipartitions(psi.n_qubits)
    entries = [{"subset": list(p.subset_a), "purity": qstate.purity(psi, p)} for p in parts]
    return {"state": label, "n": psi.n_qubits, "purities": entries}, None


def cmd_pme(args):
    label, psi = _load_state(args)
    lo, hi = qstate.pme_bounds(psi.n_qubits)
    return {"state": label, "n": psi.n_qubits, "pme": qstate.pme(psi), "bounds": [lo, hi]}, None


def cmd_rdmeq(args):
    label, psi = _load_state(args)
    other_label, phi = _load_state(args, "other")
    ks = [args.k] if args.k else range(1, psi.n_qubits)
    results = [{"k": k, "equal": qstate.rdms_equal(psi, phi, k, args.tol)} for k in ks]
    return {"state": label, "other": other_label, "results": results}, None


def cmd_cond3(args):
    if args.params:
        p = hamlib.TwoBodyParams3.from_json(json.loads(Path(args.params).read_text()))
        source = args.params
    elif args.h3:
        try:
            J, k = (float(x) for x in args.h3.split(","))
        except ValueError:
            raise UsageError("--h3 expects J,k") from None
        p = hamlib.TwoBodyParams3.from_h3(J, k)
        source = f"h3:{args.h3}"
    else:
        raise UsageError("one of --params or --h3 is required")
    rep = hamlib.check_cond3(p, args.tol)
    m = assemble(hamlib.build_general3(p))
    ev = analysis.verify_eigenstate(m, qstate.mmes3())
    return {"source": source, **rep.to_json(), "m3_residual": ev.residual}, None


def cmd_wrange(args):
    interval = parse_interval(args.interval)
    r = analysis.w_ground_range(args.n, interval, tol=args.tol)
    out = {"n": args.n, "interval": list(interval), "lo": r.lo if r.found else None,
           "hi": r.hi if r.found else None, "found": r.found}
    return out, None


def cmd_mmes_search(args):
    r = analysis.minimize_pme(args.n, args.starts, args.seed, args.max_iter, args.tol_grad)
    out = r.to_json()
    out["n"] = args.n
    return out, None


def cmd_parse(args):
    if args.text:
        text, source = args.text, "<text>"
    elif args.file:
        text, source = Path(args.file).read_text(), args.file
    else:
        raise UsageError("one of --file or --text is required")
    h = parse_hamiltonian(text)
    return {"source": source, "text": render(h), "parameters": h.parameters,
            "max_body_size": max_body_size(h), "hamiltonian": h.to_json()}, None


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "degeneracies": cmd_degeneracies,
    "crossings": cmd_crossings,
    "verify": cmd_verify,
    "purity": cmd_purity,
    "pme": cmd_pme,
    "rdmeq": cmd_rdmeq,
    "cond3": cmd_cond3,
    "wrange": cmd_wrange,
    "mmes-search": cmd_mmes_search,
    "parse": cmd_parse,
}
CSV_COMMANDS = {"spectrum", "sweep", "degeneracies", "crossings"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    p = _Parser(prog="entspec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=["json", "csv"], default=None)

    def ham(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--builtin", help="wxx:N, h3, h4, h5, ghzfam:N, ising0:N")
        g.add_argument("--file", help="Hamiltonian program file")
        sp.add_argument("--fix", action="append", metavar="NAME=VALUE", help="parameter binding")

    def tols(sp):
        sp.add_argument("--tol-residual", type=float, default=analysis.TOL_RESIDUAL)
        sp.add_argument("--tol-cluster", type=float, default=DEFAULT_CLUSTER_TOL)

    def state(sp, name="state"):
        sp.add_argument(f"--{name}", help="ghz+:N, ghz-:N, w:N, m3, m4, m4r, m5, basis:BITS")
        sp.add_argument(f"--{name}-file", help="state JSON file")

    sp = sub.add_parser("spectrum", help="eigenvalues at one binding")
    common(sp), ham(sp), tols(sp), state(sp, "track")

    sp = sub.add_parser("sweep", help="spectrum along one parameter")
    common(sp), ham(sp), tols(sp), state(sp, "track")
    sp.add_argument("--vary", required=True)
    sp.add_argument("--range", required=True, metavar="MIN:MAX:POINTS")

    sp = sub.add_parser("degeneracies", help="degeneracy points of a tracked eigenstate")
    common(sp), ham(sp), state(sp, "track")
    sp.add_argument("--vary", required=True)
    sp.add_argument("--interval", required=True, metavar="MIN:MAX")
    sp.add_argument("--tol-x", type=float, default=analysis.TOL_X)

    sp = sub.add_parser("crossings", help="degeneracies of G+ in the GHZ family")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--interval", required=True, metavar="MIN:MAX")
    sp.add_argument("--tol-x", type=float, default=analysis.TOL_X)

    sp = sub.add_parser("verify", help="eigenstate report")
    common(sp), ham(sp), tols(sp), state(sp)

    sp = sub.add_parser("purity", help="purity of one or all balanced bipartitions")
    common(sp), state(sp)
    sp.add_argument("--subset", help="comma-separated qubit labels of subsystem A")

    sp = sub.add_parser("pme", help="potential of multipartite entanglement")
    common(sp), state(sp)

    sp = sub.add_parser("rdmeq", help="compare k-body reduced density matrices")
    common(sp), state(sp), state(sp, "other")
    sp.add_argument("--k", type=int)
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = sub.add_parser("cond3", help="check the GHZ+ eigenstate conditions for 3 qubits")
    common(sp)
    sp.add_argument("--params", help="JSON file with gamma[3][3][3] and h[3][3]")
    sp.add_argument("--h3", metavar="J,k", help="use the parameter image of H3(J,k)")
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = sub.add_parser("wrange", help="b-range where W_n is the nondegenerate ground state")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--interval", default="-4:1", metavar="MIN:MAX")
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = sub.add_parser("mmes-search", help="multi-start minimization of pi_ME")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--starts", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-iter", type=int, default=2000)
    sp.add_argument("--tol-grad", type=float, default=analysis.TOL_GRAD)

    sp = sub.add_parser("parse", help="check and echo a Hamiltonian program")
    common(sp)
    sp.add_argument("--file")
    sp.add_argument("--text")
    return p


_VALUE_FLAGS = {"--range", "--interval", "--fix"}


def _join_negative_values(argv):
    # "--range -3:3:601" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        fmt = args.format
        if fmt is None:
            by_suffix = args.out and args.out.endswith(".csv") and args.command in CSV_COMMANDS
            fmt = "csv" if by_suffix else "json"
        if fmt == "csv" and args.command not in CSV_COMMANDS:
            raise UsageError(f"{args.command} has no CSV output")
        obj, csv_text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return 2
    except (EntspecError, ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, stderr)
        stderr.write("\n")
        return 1
    if fmt == "json":
        obj = clean({"command": args.command, **obj})
        validate(args.command, obj)
        text = json.dumps(obj, indent=2) + "\n"
    else:
        text = csv_text
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    return 0


def main():
    sys.exit(run())
