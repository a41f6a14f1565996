"""Command-line front end: ``dbec {regime,evaluate,groundstate,gamma-sweep,verify}``.

Exit codes: 0 success, 2 usage error, 3 coupling rejected (no solutions
exist in that regime), 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from importlib import metadata
from pathlib import Path

from . import config as cfgmod
from . import io
from ._validation import ResolutionError
from .functionals import CouplingPair, classify, evaluate
from .groundstate import DivergenceError, RegimeError, minimize, sweep_gamma

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_NONCONVERGED = 0, 2, 3, 4


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
        return "0+unknown"


class _Usage(Exception):
    pass


def _overrides(args):
    o = {
        ("solver", "mass"): args.mass,
        ("coupling", "lambda1"): args.lambda1,
        ("coupling", "lambda2"): args.lambda2,
        ("grid", "n"): args.n,
        ("grid", "L"): args.L,
        ("grid", "dipole_cutoff"): args.dipole_cutoff,
        ("solver", "dtau"): args.dtau,
        ("solver", "max_iter"): args.max_iter,
        ("solver", "residual_tol"): args.residual_tol,
        ("init", "tag"): args.init,
        ("init", "seed"): args.seed,
    }
    if getattr(args, "masses", None) is not None:
        o[("sweep", "masses")] = args.masses
    return {k: (None if v is None else str(v)) for k, v in o.items()}


def _load(args):
    try:
        return cfgmod.load(args.config, _overrides(args))
    except (OSError, cfgmod.ConfigError) as exc:
        raise _Usage(str(exc)) from exc


def _run_dir(args, command, rc):
    if args.output is not None:
        path = Path(args.output)
    else:
        digest = hashlib.sha256(cfgmod.dumps(rc).encode()).hexdigest()[:12]
        path = io.default_output_root() / f"{command}-{digest}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_regime(args, out):
    rc = classify(CouplingPair(args.lambda1, args.lambda2))
    out.write(io.dumps(rc.to_dict(), indent=None))
    return EXIT_OK


def cmd_evaluate(args, out):
    try:
        grid, u = io.read_field(args.field)
    except (OSError, ValueError) as exc:
        raise _Usage(str(exc)) from exc
    rep = evaluate(grid, u, CouplingPair(args.lambda1, args.lambda2))
    out.write(rep.to_json() + "\n")
    return EXIT_OK


def cmd_groundstate(args, out):
    rc = _load(args)
    cfg = rc.solver
    start = time.perf_counter()
    try:
        res = minimize(cfg)
    except RegimeError as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        return EXIT_REGIME
    except (DivergenceError, ResolutionError) as exc:
        sys.stderr.write(f"failed: {exc}\n")
        return EXIT_NONCONVERGED
    run = _run_dir(args, "groundstate", rc)
    io.write_json(run / "config.json", cfg.to_dict())
    io.write_history(run / "history.csv", res.history)
    io.write_field(run / "field.bin", cfg.grid, res.u)
    summary = res.summary()
    io.write_json(run / "result.json", summary)
    outputs = ["config.json", "history.csv", "field.bin", "result.json"]
    if res.control is not None and res.control.u is not None:
        io.write_history(run / "control_history.csv", res.control.history)
        outputs.append("control_history.csv")
    io.write_manifest(
        run, "groundstate", cfgmod.to_sections(rc), cfg.grid, cfg.seed, outputs, time.perf_counter() - start, _version()
    )
    out.write(io.dumps({"run_dir": str(run), **{k: v for k, v in summary.items() if k != "control"}}))
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_gamma_sweep(args, out):
    rc = _load(args)
    if not rc.masses:
        raise _Usage("the sweep needs a non-empty list of masses ([sweep] masses or --masses)")
    start = time.perf_counter()
    try:
        curve = sweep_gamma(rc.masses, rc.solver, jobs=args.jobs, margin=rc.margin)
    except RegimeError as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        return EXIT_REGIME
    except ValueError as exc:
        raise _Usage(str(exc)) from exc
    run = _run_dir(args, "gamma-sweep", rc)
    lo, hi = io.write_gamma_curve(run / "gamma.csv", curve)
    n_conv = sum(r["converged"] for r in curve.rows)
    result = {
        "threshold": curve.threshold,
        "margin": curve.margin,
        "c_star_lower": lo,
        "c_star_upper": hi,
        "converged_rows": n_conv,
        "rows": len(curve.rows),
        "warm_start": args.jobs <= 1,
    }
    io.write_json(run / "result.json", result)
    io.write_manifest(
        run,
        "gamma-sweep",
        cfgmod.to_sections(rc),
        rc.solver.grid,
        rc.solver.seed,
        ["gamma.csv", "result.json"],
        time.perf_counter() - start,
        _version(),
    )
    out.write(io.dumps({"run_dir": str(run), **result}))
    return EXIT_OK if 2 * n_conv >= len(curve.rows) else EXIT_NONCONVERGED


def cmd_verify(args, out):
    from . import verify

    if args.suite not in verify.SUITES:
        raise _Usage(f"unknown suite {args.suite!r}; choose from {', '.join(verify.SUITES)}")
    kwargs = {}
    if args.suite == "pohozaev":
        kwargs["tol"] = args.tol
        if args.field is not None:
            try:
                grid, u = io.read_field(args.field)
            except (OSError, ValueError) as exc:
                raise _Usage(str(exc)) from exc
            if args.config is not None:
                # the field header has no dipole cutoff; take the grid from the config
                grid = _load_config_grid(args.config, grid)
            cp = CouplingPair(args.lambda1, args.lambda2)
            if args.config is not None:
                cp = _load_config_coupling(args.config)
            kwargs.update(field=(grid, u), cp=cp)
    elif args.field is not None:
        raise _Usage("--field only applies to the pohozaev suite")
    checks = verify.run(args.suite, **kwargs)
    width = max(len(c.name) for c in checks)
    for c in checks:
        out.write(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}\n")
    ok = all(c.passed for c in checks)
    out.write(f"{args.suite}: {'all passed' if ok else 'FAILED'}\n")
    return EXIT_OK if ok else EXIT_NONCONVERGED


def _load_config_json(path):
    try:
        return io.read_json(path)
    except (OSError, ValueError) as exc:
        raise _Usage(f"cannot read {path}: {exc}") from exc


def _load_config_grid(path, grid):
    from .grid import Grid

    d = _load_config_json(path)
    g = Grid.from_dict(d["grid"])
    if g.n != grid.n or g.L != grid.L:
        raise _Usage("field and config grids differ")
    return g


def _load_config_coupling(path):
    d = _load_config_json(path)
    return CouplingPair(**d["coupling"])


def _add_run_options(p):
    p.add_argument("config", nargs="?", help="configuration file (INI sections, or .json)")
    p.add_argument("--output", "-o", help="run directory (default: $%s/<command>-<hash>)" % io.ENV_OUTPUT_ROOT)
    p.add_argument("--mass", type=float)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--n", help="points per axis: one value or three comma separated")
    p.add_argument("--L", help="box half-lengths: one value or three comma separated")
    p.add_argument("--dipole-cutoff", dest="dipole_cutoff", type=float)
    p.add_argument("--dtau", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--residual-tol", dest="residual_tol", type=float)
    p.add_argument("--init", choices=("auto", "gaussian", "bubble", "random"))
    p.add_argument("--seed", type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dbec", description="Normalized ground states of a dipolar Gross-Pitaevskii model with quintic focusing."
    )
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("regime", help="classify a coupling pair")
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.set_defaults(func=cmd_regime)

    p = sub.add_parser("evaluate", help="functionals of a stored field")
    p.add_argument("field")
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("groundstate", help="compute a ground state at one mass")
    _add_run_options(p)
    p.set_defaults(func=cmd_groundstate)

    p = sub.add_parser("gamma-sweep", help="ground-state energy over a list of masses")
    _add_run_options(p)
    p.add_argument("--masses", help="comma separated, strictly increasing")
    p.add_argument("--jobs", type=int, default=1, help="parallel rows (cold starts instead of warm starts)")
    p.set_defaults(func=cmd_gamma_sweep)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite")
    p.add_argument("--field", help="stored field for the pohozaev suite")
    p.add_argument("--config", help="config.json of the run that produced --field")
    p.add_argument("--lambda1", type=float, default=-1.0)
    p.add_argument("--lambda2", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args, out)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"dbec {args.command}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
