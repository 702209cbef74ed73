"""``compact-conserve`` command line.

Subcommands: ``verify``, ``analyze``, ``optimize``, ``solve`` and ``export``.
Exit codes are 0 on success, 1 on a numerical or feasibility failure and 2
on a usage or input error.  ``--config run.toml`` supplies defaults that
explicit flags override; keys are flag names (``t-final`` or ``t_final``),
either at the top level or in a table named after the subcommand.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    average_resolution,
    measured_precision,
    stability_spectrum,
    write_response_csv,
    write_spectrum_csv,
)
from .errors import CompactSchemeError, NegativePressure, NoFeasiblePoint, NonFiniteState, SchemeFormatError
from .optimizer import DEConfig, OptimizationProblem, optimize
from .scheme import SCHEME_IDS, assemble_matrices, verify_conservation_identities, verify_order_conditions
from .schemefile import atomic_write_text, resolve_scheme, scheme_to_document
from .solvers import (
    VortexConfig,
    advect_1d,
    advect_2d_varcoeff,
    conservation_monitor,
    error_and_order,
    euler_vortex_2d,
    identity_residual,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("compact_conserve")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "COMPACT_CONSERVE_THREADS"
VERIFY_TOL = 1e-10
EXPERIMENTS = ("advect1d", "advect2d", "euler-vortex")


class UsageError(Exception):
    pass


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    if isinstance(text, int):
        return [text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _threads(requested):
    cap = os.environ.get(THREADS_ENV)
    n = requested if requested else (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {cap!r}")
    return max(1, n)


def _load_source(source):
    if source is None:
        raise UsageError("a scheme id (P1, P2, P3) or scheme file path is required")
    if source not in SCHEME_IDS and not Path(source).exists():
        if Path(source).suffix or os.sep in source:
            raise UsageError(f"scheme file not found: {source}")
        raise UsageError(f"unknown scheme id {source!r}; expected one of {', '.join(SCHEME_IDS)} or a file")
    try:
        return resolve_scheme(source)
    except (SchemeFormatError, OSError, ValueError) as exc:
        raise UsageError(f"cannot load scheme {source}: {exc}")


def _out_dir(path):
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}")
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out} is not writable")
    return out


def _write_csv(path, header, rows):
    fh = io.StringIO()
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in row])
    atomic_write_text(path, fh.getvalue())


# -- verify ----------------------------------------------------------------


def cmd_verify(args) -> int:
    scheme = _load_source(args.scheme)
    order = verify_order_conditions(scheme)
    cons = verify_conservation_identities(assemble_matrices(scheme, args.n))
    degree = measured_precision(scheme)
    print(f"scheme {scheme.scheme_id} (depth {scheme.depth})")
    print(f"{'condition':<24} {'residual':>12}")
    for name, value in order.residuals.items():
        flag = "" if abs(value) <= VERIFY_TOL else "  FAIL"
        print(f"{name:<24} {value:12.3e}{flag}")
    for name, value in (("conservation.WA", cons.wa_residual), ("conservation.WB", cons.wb_residual)):
        flag = "" if value <= VERIFY_TOL else "  FAIL"
        print(f"{name:<24} {value:12.3e}{flag}")
    print(f"quadrature degree        {degree:12d}{'' if degree >= 3 else '  FAIL'}")
    failing = [k for k, v in order.residuals.items() if abs(v) > VERIFY_TOL]
    failing += [k for k, v in (("conservation.WA", cons.wa_residual), ("conservation.WB", cons.wb_residual)) if v > VERIFY_TOL]
    if degree < 3:
        failing.append("quadrature.degree")
    if failing:
        print(f"verification failed: {', '.join(failing)}", file=sys.stderr)
        return EXIT_FAIL
    print("all conditions satisfied")
    return EXIT_OK


# -- analyze ---------------------------------------------------------------


def cmd_analyze(args) -> int:
    scheme = _load_source(args.scheme)
    out = _out_dir(args.out)
    report = average_resolution(scheme, refine=args.refine)
    stable = True
    for n in args.n:
        spec = stability_spectrum(scheme, n, negate=not args.literal_sign)
        write_spectrum_csv(out / f"spectrum_{n}.csv", spec)
        stable &= spec.stable
        print(f"n = {n}: max Re(lambda) = {spec.max_real_part:.6e}")
    if report.per_node:
        write_response_csv(out / "resolution.csv", report)
    if not report.feasible:
        print(f"infeasible resolution: {report.failure}", file=sys.stderr)
        return EXIT_FAIL
    for node in report.per_node:
        c = node.critical
        print(f"node {node.node_index}: sigma = {node.sigma}, omega_R = {c.omega_r:.4f}, omega_I = {c.omega_i:.4f}")
    print(f"omega_f = {report.omega_f:.6f}")
    if not stable:
        print("warning: a reduced spectrum has a non-negative real part", file=sys.stderr)
    return EXIT_OK


# -- optimize --------------------------------------------------------------


def cmd_optimize(args) -> int:
    if args.scheme not in SCHEME_IDS:
        raise UsageError(f"optimize needs a scheme id ({', '.join(SCHEME_IDS)}), got {args.scheme!r}")
    problem = OptimizationProblem(
        args.scheme, n_for_stability=args.stability_n, seed=args.seed, literal_sign=args.literal_sign
    )
    config = DEConfig(
        population_size=args.population,
        crossover_rate=args.crossover,
        max_generations=args.generations,
        tolerance=args.tolerance,
        rng_seed=args.seed,
        workers=_threads(args.workers),
    )

    def progress(gen, best, spread):
        print(f"gen {gen:4d}  best {best:+.6f}  spread {spread:.3e}", file=sys.stderr, flush=True)

    try:
        result = optimize(problem, config, progress=None if args.quiet else progress)
    except NoFeasiblePoint as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    if result.generations == 0 and args.generations == 0 and not args.allow_initial:
        print("--generations 0 evaluates only the initial population; pass --allow-initial to accept it",
              file=sys.stderr)
        return EXIT_FAIL
    meta = {
        "seed": args.seed,
        "generations": result.generations,
        "objective": result.best_objective,
        "omega_f": -result.best_objective,
        "evaluations": result.evaluations,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    doc = scheme_to_document(result.scheme, provenance="optimized", meta=meta)
    doc["free_params"] = {k: repr(v) for k, v in result.best_params.items()}
    out = Path(args.out or f"{args.scheme}_optimized.json")
    if out.parent != Path("."):
        _out_dir(out.parent)
    atomic_write_text(out, json.dumps(doc, indent=2) + "\n")
    print(f"objective = {result.best_objective:.6f} after {result.generations} generations -> {out}")
    return EXIT_OK


# -- solve -----------------------------------------------------------------


def _lines_identity_residual(m, field2d):
    # identity residual of every x-line of a (ny, nx) field
    return max(identity_residual(m, row) for row in np.atleast_2d(field2d))


def _write_order(out, runs):
    est = error_and_order(runs)
    rows = [(est.h[0], est.errors[0], "")]
    rows += [(h, e, p) for h, e, p in zip(est.h[1:], est.errors[1:], est.pairwise)]
    _write_csv(out / "order.csv", ["h", "error", "pairwise_order"], rows)
    print(f"least-squares order = {est.slope:.4f}")
    return est


def _write_field(path, x, y, values):
    X, Y = np.meshgrid(x, y)
    _write_csv(path, ["x", "y", "value"], zip(X.ravel(), Y.ravel(), np.asarray(values).ravel()))


def _solve_advect1d(args, scheme, out):
    t_final = args.t_final if args.t_final is not None else (1000.0 if args.full else 10.0)
    cfl = args.cfl if args.cfl is not None else 0.5
    ns = args.n or [129]
    runs, last = [], None
    for n in ns:
        run = advect_1d(scheme, n, t_final, cfl, boundary_mode=args.boundary_mode)
        print(f"n = {n}: max L_inf error = {run.max_error:.6e}")
        runs.append((run.h, run.max_error))
        if len(ns) > 1:
            _write_csv(out / f"errors_n{n}.csv", ["t", "linf_error"], zip(run.times, run.errors))
        last = run
    _write_csv(out / "errors.csv", ["t", "linf_error"], zip(last.times, last.errors))
    hist = conservation_monitor(scheme, last)
    _write_csv(out / "conservation.csv", ["t", "residual"], zip(hist.times, hist.step_mismatch))
    print(f"max conservation mismatch per step = {hist.max_step_mismatch:.3e}")
    x = np.linspace(0.0, 2.0 * np.pi, last.n)
    _write_field(out / "solution.csv", x, [0.0], last.solution)
    return runs


def _solve_advect2d(args, scheme, out):
    t_final = args.t_final if args.t_final is not None else (1000.0 if args.full else 1.0)
    dt = args.dt if args.dt is not None else 0.001
    ns = args.n or [41]
    runs, last = [], None
    for n in ns:
        run = advect_2d_varcoeff(scheme, n, dt, t_final, boundary_mode=args.boundary_mode,
                                 record_every=args.record_every)
        print(f"n = {n}: max L_inf error = {run.max_error:.6e}")
        runs.append((run.h, run.max_error))
        if len(ns) > 1:
            _write_csv(out / f"errors_n{n}.csv", ["t", "linf_error"], zip(run.times, run.errors))
        last = run
    _write_csv(out / "errors.csv", ["t", "linf_error"], zip(last.times, last.errors))
    resid = max(_lines_identity_residual(last.matrices, last.solution),
                _lines_identity_residual(last.matrices, last.solution.T))
    _write_csv(out / "conservation.csv", ["t", "residual"], [(last.times[-1], resid)])
    x = np.linspace(0.0, np.sqrt(2.0), last.n)
    _write_field(out / "solution.csv", x, x, last.solution)
    return runs


def _solve_euler(args, scheme, out):
    if args.epsilon is not None and not args.epsilon > 0:
        raise UsageError(f"--epsilon must be positive, got {args.epsilon}")
    t_final = args.t_final if args.t_final is not None else (200.0 if args.full else 2.0)
    ns = args.n or ([150] if args.full else [60])
    snaps = tuple(args.snapshot_times) if args.snapshot_times else (0.0, t_final)
    runs, last = [], None
    for n in ns:
        try:
            config = VortexConfig(
                epsilon=args.epsilon if args.epsilon is not None else 0.1,
                n_x=n,
                mach=args.mach if args.mach is not None else 1.5,
                t_final=t_final,
                cfl=args.cfl if args.cfl is not None else 0.5,
                snapshot_times=snaps,
                boundary_mode=args.boundary_mode,
            )
        except ValueError as exc:
            raise UsageError(str(exc))
        run = euler_vortex_2d(scheme, config)
        print(f"n = {n}: max L_inf pressure error = {run.max_pressure_error:.6e}")
        runs.append((run.h, run.max_pressure_error))
        if len(ns) > 1:
            _write_csv(out / f"errors_n{n}.csv", ["t", "linf_error"], zip(run.times, run.pressure_errors))
        last = run
    _write_csv(out / "errors.csv", ["t", "linf_error"], zip(last.times, last.pressure_errors))
    from .solvers.euler import fluxes

    m = assemble_matrices(scheme, last.config.n_x - 1)
    e_flux, _ = fluxes(last.final.q, last.config.gamma)
    resid = max(_lines_identity_residual(m, comp) for comp in e_flux)
    _write_csv(out / "conservation.csv", ["t", "residual"], [(last.times[-1], resid)])
    for ts, (vort, pres) in sorted(last.snapshots.items()):
        tag = f"{ts:g}"
        _write_field(out / f"vorticity_t{tag}.csv", last.x, last.y, vort)
        _write_field(out / f"pressure_t{tag}.csv", last.x, last.y, pres)
    return runs


def cmd_solve(args) -> int:
    if args.experiment not in EXPERIMENTS:
        raise UsageError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {args.experiment!r}")
    if args.epsilon is not None and not args.epsilon > 0:
        raise UsageError(f"--epsilon must be positive, got {args.epsilon}")
    if args.n and any(n < 2 for n in args.n):
        raise UsageError("--n values must be at least 2")
    scheme = _load_source(args.scheme)
    out = _out_dir(args.out)
    handler = {"advect1d": _solve_advect1d, "advect2d": _solve_advect2d, "euler-vortex": _solve_euler}
    try:
        runs = handler[args.experiment](args, scheme, out)
    except NonFiniteState as exc:
        kind = "negative pressure" if isinstance(exc, NegativePressure) else "non-finite state"
        print(f"{kind} at t = {exc.t:.6g}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if len(runs) > 1:
        try:
            _write_order(out, runs)
        except CompactSchemeError as exc:
            print(f"order estimate unavailable: {exc}", file=sys.stderr)
            return EXIT_FAIL
    return EXIT_OK


# -- export ----------------------------------------------------------------


def cmd_export(args) -> int:
    scheme = _load_source(args.scheme)
    out = _out_dir(args.out)
    doc = scheme_to_document(scheme, provenance="export", meta={"source": str(args.scheme)})
    atomic_write_text(out / f"{scheme.scheme_id}.json", json.dumps(doc, indent=2) + "\n")
    if args.n:
        for n in args.n:
            m = assemble_matrices(scheme, n)
            for name, mat in (("A", m.a_matrix), ("B", m.b_matrix)):
                rows = [(int(i), int(j), mat[i, j]) for i, j in zip(*np.nonzero(mat))]
                _write_csv(out / f"{name}_{n}.csv", ["row", "col", "value"], rows)
            _write_csv(out / f"weights_{n}.csv", ["i", "w", "wprime"],
                       [(i, w, wp) for i, (w, wp) in enumerate(zip(m.w_vector, m.wprime_vector))])
    print(f"exported {scheme.scheme_id} to {out}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compact-conserve",
        description="Globally conservative compact finite-difference schemes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML file with defaults for the subcommand's flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check order conditions, conservation and quadrature degree")
    p.add_argument("scheme", nargs="?", help="P1, P2, P3 or a scheme JSON file")
    p.add_argument("--n", type=int, default=100, help="grid intervals for the matrix identities")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="resolution curves, omega_f and stability spectra")
    p.add_argument("scheme", nargs="?")
    p.add_argument("--n", type=_int_list, default=[50, 100, 200], help="comma-separated grid sizes")
    p.add_argument("--out", default="analysis")
    p.add_argument("--refine", action="store_true", help="interpolate critical frequencies between grid points")
    p.add_argument("--literal-sign", action="store_true", help="use D(2:N, 2:N) without the minus sign")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("optimize", help="differential-evolution search for the free parameters")
    p.add_argument("scheme", nargs="?")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generations", type=int, default=200)
    p.add_argument("--population", type=int, default=None, help="default 15 x dimension")
    p.add_argument("--crossover", type=float, default=0.7)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--stability-n", type=int, default=100)
    p.add_argument("--workers", type=int, default=1, help="threads; capped by " + THREADS_ENV)
    p.add_argument("--allow-initial", action="store_true",
                   help="with --generations 0, accept the best initial member")
    p.add_argument("--literal-sign", action="store_true")
    p.add_argument("--quiet", action="store_true", help="suppress the per-generation progress lines")
    p.add_argument("--out", default=None, help="output JSON (default <id>_optimized.json)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("solve", help="run a PDE benchmark")
    p.add_argument("experiment", nargs="?", help=", ".join(EXPERIMENTS))
    p.add_argument("scheme", nargs="?")
    p.add_argument("--n", type=_int_list, default=None, help="grid points per axis, comma-separated")
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--cfl", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--mach", type=float, default=None)
    p.add_argument("--snapshot-times", type=_float_list, default=None)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--boundary-mode", choices=("derivative", "stage"), default="derivative")
    p.add_argument("--full", action="store_true", help="use the long horizons (t = 1000, vortex t u/L = 200 on 150^2)")
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export", help="write a scheme as JSON (and optionally its matrices)")
    p.add_argument("scheme", nargs="?")
    p.add_argument("--n", type=_int_list, default=None, help="also write A, B, W, W' for these N")
    p.add_argument("--out", default="export")
    p.set_defaults(func=cmd_export)
    return parser


def _config_defaults(path, command, subparser):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}")
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    flat.update(data.get(command, {}))
    known = {a.dest: a for a in subparser._actions}
    aliases = {"output": "out", "output_dir": "out", "scheme_file": "scheme"}
    defaults = {}
    for key, value in flat.items():
        dest = aliases.get(key.replace("-", "_"), key.replace("-", "_"))
        if dest not in known or dest == "help":
            raise UsageError(f"unknown config key {key!r} for {command}")
        action = known[dest]
        if action.type is not None and not isinstance(value, bool):
            try:
                value = action.type(value)
            except (argparse.ArgumentTypeError, ValueError, TypeError) as exc:
                raise UsageError(f"bad value for {key}: {exc}")
        defaults[dest] = value
    return defaults


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.config:
            subparser = parser._subparsers._group_actions[0].choices[args.command]
            subparser.set_defaults(**_config_defaults(args.config, args.command, subparser))
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    except (CompactSchemeError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
