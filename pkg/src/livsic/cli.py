"""Command-line interface: ``livsic <subcommand> ...``.

Exit status 0 when every requested check passes, 1 when a check fails and 2
for malformed input.  Messages go to stderr; results to the output paths.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import acceptance
from .cohomology import (
    PolicyDeadEnd,
    SpectralFailure,
    chi_derivative_series,
    chi_higher_derivative,
    solve_spectral,
    verify_cocycle,
)
from .counterexample import CounterexampleSpec, build_counterexample, certify_smoothness, is_markov
from .interval_maps import eval_map
from .io import (
    MalformedInput,
    cocycle_from_dict,
    dumps,
    load_cocycle,
    load_map,
    map_to_dict,
    read_json,
    write_csv,
    write_json,
)
from .reachability import CoverError, check_diameter_bound, q_partition
from .transfer_operator import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    ConvergenceError,
    GridFunction,
    spectral_data,
)

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _emit(args, payload) -> None:
    if getattr(args, "out", None):
        write_json(args.out, payload)
    else:
        sys.stdout.write(dumps(payload))


def cmd_density(args) -> int:
    tmap = load_map(args.map)
    sd = spectral_data(tmap, None, args.grid, args.tol, args.max_iter)
    if args.out:
        sd.h.to_csv(args.out)
    else:
        sys.stdout.write("x,value\n")
        for x, v in zip(sd.h.nodes, sd.h.values):
            sys.stdout.write(f"{x:.17g},{v:.17g}\n")
    print(f"eigenvalue {sd.h_eigenvalue:.17g}, min density {sd.h.floor:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_eigendata(args) -> int:
    tmap = load_map(args.map)
    phi = load_cocycle(args.cocycle, tmap)
    sd = spectral_data(tmap, phi, args.grid, args.tol, args.max_iter)
    payload = {
        "a": sd.a,
        "eigenvalue": sd.eigenvalue,
        "h_eigenvalue": sd.h_eigenvalue,
        "gamma_floor": sd.gamma_floor,
        "n_grid": args.grid,
    }
    _emit(args, payload)
    if args.csv:
        write_csv(args.csv, {"x": sd.w.nodes, "w": sd.w.values, "nu": sd.nu, "h": sd.h.values})
    return EXIT_OK


def cmd_solve(args) -> int:
    tmap = load_map(args.map)
    phi = load_cocycle(args.cocycle, tmap)
    sol = solve_spectral(
        tmap, phi, n_grid=args.grid, tol=args.tol, max_iter=args.max_iter,
        normalization=args.normalization, x_ref=args.x_ref,
    )
    diag = sol.diagnostics()
    if args.out:
        sol.chi.to_csv(args.out)
        side = args.diagnostics or str(Path(args.out).with_suffix(".json"))
        write_json(side, diag)
    else:
        sys.stdout.write(dumps(diag))
    if not sol.is_coboundary:
        print(f"not a coboundary: |a - 1| = {abs(sol.a - 1):.3g}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_series(args) -> int:
    tmap = load_map(args.map)
    phi = load_cocycle(args.cocycle, tmap)
    rows = []
    for x in args.points:
        if not 0 <= x <= 1:
            raise MalformedInput(f"point {x} outside [0, 1]")
        if args.order == 1:
            s = chi_derivative_series(tmap, phi, x, args.n_trunc, args.policy)
        else:
            s = chi_higher_derivative(tmap, phi, x, args.order, args.n_trunc, args.policy)
        rows.append({"x": x, "order": args.order, "value": s.value,
                     "tail_bound": s.tail_bound, "n_terms": s.n_terms})
    _emit(args, {"policy": args.policy, "results": rows})
    return EXIT_OK


def cmd_qpartition(args) -> int:
    tmap = load_map(args.map)
    q = q_partition(tmap, m=args.m, n_max=args.n_max)
    payload = q.to_dict()
    payload["boundaries"] = q.boundaries
    _emit(args, payload)
    if q.delta is None:
        print("images do not cover (0, 1): diameter bound not checked", file=sys.stderr)
        return EXIT_CHECK
    if not check_diameter_bound(q):
        print("an element is shorter than delta/2", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_counterexample(args) -> int:
    spec = CounterexampleSpec(Fraction(args.c).limit_denominator(10**9), args.k)
    ce = build_counterexample(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "map.json", map_to_dict(ce.tmap))
    x = np.linspace(0.0, 1.0, args.samples)
    tx = eval_map(ce.tmap, x)
    write_csv(out / "samples.csv", {
        "x": x, "T": tx, "chi": ce.chi(x), "chi_T": ce.chi(tx), "phi": ce.phi(x),
    })
    pts = [float(p) for p in ce.partition]
    phi_rep = certify_smoothness(ce.phi, pts, spec.k)
    chi_rep = certify_smoothness(ce.chi, pts, spec.k)
    resid = verify_cocycle(ce.tmap, ce.phi, ce.chi)
    fails = chi_rep.failures()
    chi_ok = len(fails) == 1 and fails[0]["x"] == 0.5 and fails[0]["order"] == 0
    markov = is_markov(ce.tmap, ce.partition)
    report = {
        "c": float(spec.c),
        "k": spec.k,
        "partition": pts,
        "residual_sup": resid.sup,
        "markov": markov,
        "phi": phi_rep.to_dict(),
        "chi": chi_rep.to_dict(),
        "chi_single_jump_at_half": chi_ok,
    }
    write_json(out / "certification.json", report)
    ok = phi_rep.passed and chi_ok and markov and resid.sup <= 1e-12
    print(f"phi certified: {phi_rep.passed}; chi single jump at 1/2: {chi_ok}; "
          f"Markov: {markov}; residual {resid.sup:.3g}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_verify(args) -> int:
    tmap = load_map(args.map)
    phi = load_cocycle(args.cocycle, tmap)
    if args.chi.endswith(".csv"):
        chi = GridFunction.from_csv(args.chi)
    else:
        chi = cocycle_from_dict(read_json(args.chi), tmap)
    rep = verify_cocycle(tmap, phi, chi, n_samples=args.samples)
    payload = rep.to_dict()
    payload["tol"] = args.check_tol
    payload["pass"] = rep.sup <= args.check_tol
    _emit(args, payload)
    return EXIT_OK if payload["pass"] else EXIT_CHECK


def cmd_suite(args) -> int:
    results = acceptance.run_all(seed=args.seed, only=args.only)
    for r in results:
        print(r.line())
    if args.out:
        write_json(args.out, {"seed": args.seed, "criteria": [r.to_dict() for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="livsic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, cocycle=False, grid=True):
        sp.add_argument("--map", required=True, help="map description JSON")
        if cocycle:
            sp.add_argument("--cocycle", required=True, help="cocycle description JSON")
        if grid:
            sp.add_argument("--grid", type=_positive_int, default=4096, help="number of grid cells")
            sp.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
            sp.add_argument("--max-iter", type=_positive_int, default=DEFAULT_MAX_ITER)
        sp.add_argument("--out", help="output path (default: stdout)")

    sp = sub.add_parser("density", help="invariant density as CSV")
    common(sp)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("eigendata", help="leading eigendata of L_phi as JSON (+ CSV)")
    common(sp, cocycle=True)
    sp.add_argument("--csv", help="also write w, nu and h on the grid")
    sp.set_defaults(func=cmd_eigendata)

    sp = sub.add_parser("solve", help="spectral solution chi as CSV plus diagnostics JSON")
    common(sp, cocycle=True)
    sp.add_argument("--normalization", choices=("mean", "point"), default="mean")
    sp.add_argument("--x-ref", type=float, default=0.5)
    sp.add_argument("--diagnostics", help="diagnostics sidecar path (default: OUT with .json)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("series", help="backward-orbit derivative series at points")
    common(sp, cocycle=True, grid=False)
    sp.add_argument("--points", type=float, nargs="+", required=True)
    sp.add_argument("--order", type=_positive_int, default=1)
    sp.add_argument("--n-trunc", type=_positive_int, default=None)
    sp.add_argument("--policy", choices=("leftmost", "max-weight"), default="leftmost")
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("qpartition", help="partition Q and Lebesgue number as JSON")
    common(sp, grid=False)
    sp.add_argument("-m", type=_positive_int, default=6, help="cylinder generation")
    sp.add_argument("--n-max", type=_positive_int, default=40, help="pullback depth")
    sp.set_defaults(func=cmd_qpartition)

    sp = sub.add_parser("counterexample", help="build and certify the jump counterexample")
    sp.add_argument("--c", default="1/8")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--samples", type=_positive_int, default=2001)
    sp.add_argument("--out-dir", default="counterexample_out")
    sp.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("verify", help="residual of phi - chi o T + chi")
    common(sp, cocycle=True, grid=False)
    sp.add_argument("--chi", required=True, help="chi as GridFunction CSV or function JSON")
    sp.add_argument("--samples", type=_positive_int, default=10_000)
    sp.add_argument("--check-tol", type=_positive_float, default=1e-6)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("suite", help="run the acceptance criteria")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    sp.add_argument("--out", help="JSON report path")
    sp.set_defaults(func=cmd_suite)
    return p


def _error_path(args):
    """Where the machine-readable error goes: the JSON output, or the sidecar of a CSV output."""
    if args.command == "counterexample":
        return Path(args.out_dir) / "error.json"
    if getattr(args, "diagnostics", None):
        return args.diagnostics
    out = getattr(args, "out", None)
    if not out:
        return None
    return Path(out).with_suffix(".json") if args.command in ("density", "solve") else out


def _fail(args, status: int, kind: str, exc: Exception) -> int:
    print(f"{kind}: {exc}", file=sys.stderr)
    path = _error_path(args)
    if path is not None:
        try:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            write_json(path, {"error": kind, "message": str(exc), "exit_status": status})
        except OSError:
            pass
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConvergenceError, SpectralFailure, PolicyDeadEnd) as exc:
        return _fail(args, EXIT_CHECK, "check failed", exc)
    except (MalformedInput, CoverError, ValueError) as exc:
        return _fail(args, EXIT_INPUT, "malformed input", exc)


if __name__ == "__main__":
    sys.exit(main())
