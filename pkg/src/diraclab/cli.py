"""Command line front end.

Subcommands map one-to-one onto the library's entry points: scenario
runs, the bundled experiments, the algebra and nonlinearity checkers,
identity verification along a trajectory, the second-order residual
monitor, exact-solution tables, and plot-script emission.

Exit codes: 0 when everything requested passed, 1 when a run completed
but a check failed, 2 when the request itself was malformed (unknown
keys, incompatible frames, missing files).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import algebra, nonlinearity
from .bridge import gronwall_monitor
from .dynamics import integrate
from .exact import SolitonParams, thirring_soliton
from .grids import Grid1D
from .scenarios import (EXPERIMENT_IDS, ConfigError, ScenarioConfig,
                        _IDENTITIES_BY_SYSTEM, _ensure_dir, _run,
                        _write_csv, bundled_config_path, emit_plots,
                        experiment, run_scenario)
from .virials import identity_ids, verify_identity

__all__ = ["main"]

_SYSTEM_ALIASES = {"lab": "lab_1d", "spinor": "spinor_1d",
                   "radial": "radial_3d"}


def _resolve_scenario(token):
    """A path on disk, or the name of a bundled config."""
    if os.path.exists(token):
        return token
    base = os.path.splitext(os.path.basename(token))[0]
    return bundled_config_path(base)


def _print(line):
    sys.stdout.write(line + "\n")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_run(args):
    paths = [_resolve_scenario(tok) for tok in args.scenario]
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(run_scenario, p, args.out)
                       for p in paths]
            summaries = [f.result() for f in futures]
    else:
        summaries = [run_scenario(p, args.out) for p in paths]
    ok = True
    for s in summaries:
        tag = "pass" if s.passed else "FAIL"
        _print(f"{tag}  {s.name}  hash={s.scenario_hash}  "
               f"samples={s.n_samples}  wall={s.wall_time:.2f}s")
        ok = ok and s.passed
    return 0 if ok else 1


def _cmd_experiment(args):
    ok = True
    for ident in args.id:
        summary = experiment(ident, args.out)
        for name, verdict in sorted(summary.checks.items()):
            _print(f"{'pass' if verdict else 'FAIL'}  {ident}:{name}")
        ok = ok and summary.passed
    return 0 if ok else 1


def _cmd_check_algebra(args):
    ok = True
    for n in args.n:
        report = algebra.check_clifford(n)
        _print(f"n = {n}: {len(report.relations)} relations, "
               f"max defect {report.max_defect:g}")
        if args.verbose:
            for line in report.lines():
                _print("  " + line)
        ok = ok and report.passed
    return 0 if ok else 1


_REQUIRED_FLAGS = ("gauge_ok", "symmetry_ok", "polynomial_ok",
                   "bd_dependence_ok", "growth_ok")


def _cmd_check_nonlinearity(args):
    try:
        model = nonlinearity.builtin(args.model, coupling=args.coupling)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    report = nonlinearity.check_all(model, p_expected=args.expected_power)
    _print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    # harmonic_ok is a property of the model, not a defect; the others
    # must hold (None means not applicable)
    ok = all(getattr(report, f) is not False for f in _REQUIRED_FLAGS)
    return 0 if ok else 1


def _cmd_verify_virial(args):
    config = ScenarioConfig.from_file(_resolve_scenario(args.scenario))
    wanted = _SYSTEM_ALIASES[args.system]
    if config.system != wanted:
        raise ConfigError(f"scenario is {config.system!r}, "
                          f"--system asked for {wanted!r}")
    if args.identity not in _IDENTITIES_BY_SYSTEM[config.system]:
        raise ConfigError(
            f"identity {args.identity!r} is not defined on "
            f"{config.system!r}")
    _, traj, out_dir = _run(config, args.out)
    rep = verify_identity(traj, args.identity, m=config.mass,
                          model=config.build_model())
    fname = f"virial_{args.identity}.csv"
    _write_csv(os.path.join(out_dir, fname),
               ["t", "F", "FD", "RHS", "defect"],
               [rep.times, rep.values, rep.fd, rep.rhs, rep.defect])
    payload = rep.to_dict()
    payload["csv"] = os.path.join(out_dir, fname)
    _print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if rep.passed else 1


def _cmd_nlkg_check(args):
    config = ScenarioConfig.from_file(_resolve_scenario(args.scenario))
    if config.system != "spinor_1d":
        raise ConfigError("the second-order residual monitor needs a "
                          "spinor_1d scenario")
    model = config.build_model()
    grid = config.build_grid()
    state = config.build_initial(grid)
    traj = integrate(state, model, t_end=config.t_end, dt=config.dt,
                     m=config.mass, sample_stride=config.sample_stride)
    try:
        series = gronwall_monitor(traj, model, m=config.mass)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out_dir = _ensure_dir(args.out, config.out_dir)
    _write_csv(os.path.join(out_dir, "residuals.csv"), ["t", "M"],
               [series.times, series.values])
    quotient = series.m_max / max(series.m_first, 1e-300)
    passed = bool(quotient <= 10.0)
    payload = {
        "m_first": series.m_first,
        "m_max": series.m_max,
        "quotient": float(quotient),
        "n_samples": int(len(series.times)),
        "passed": passed,
        "csv": os.path.join(out_dir, "residuals.csv"),
    }
    _print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if passed else 1


def _cmd_emit_exact(args):
    if args.solution != "thirring":
        raise ConfigError(f"unknown solution family {args.solution!r}")
    try:
        grid = Grid1D(args.x_min, args.x_max, args.n_points)
        params = SolitonParams(args.omega, t=args.time)
        state = thirring_soliton(params, grid)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    u, v = state.fields
    out_dir = _ensure_dir(args.out, ".")
    path = os.path.join(out_dir, args.file)
    _write_csv(path, ["x", "u_re", "u_im", "v_re", "v_im"],
               [grid.x, u.real, u.imag, v.real, v.imag])
    _print(path)
    return 0


def _cmd_emit_plots(args):
    wrote = []
    for root, _dirs, files in os.walk(args.dir):
        if any(f.endswith(".csv") for f in files):
            wrote.append(emit_plots(root))
    if not wrote:
        raise ConfigError(f"no tables found under {args.dir!r}")
    for path in wrote:
        _print(path)
    return 0


# ---------------------------------------------------------------------------
# argument wiring

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="diraclab",
        description="run and interrogate semi-discrete spinor systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one or more scenario files")
    p.add_argument("--scenario", action="append", required=True,
                   help="path to a scenario file, or a bundled name; "
                        "repeatable")
    p.add_argument("--out", default=None,
                   help="output root (default: $DIRACLAB_OUT or .)")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers across scenarios")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("experiment", help="run a bundled study")
    p.add_argument("--id", action="append", required=True,
                   choices=EXPERIMENT_IDS, help="repeatable")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("check-algebra",
                       help="validate the matrix family relations")
    p.add_argument("--n", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_check_algebra)

    p = sub.add_parser("check-nonlinearity",
                       help="admissibility report for a catalog model")
    p.add_argument("--model", required=True)
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--expected-power", type=int, default=None)
    p.set_defaults(func=_cmd_check_nonlinearity)

    p = sub.add_parser("verify-virial",
                       help="rate-identity defect table along a run")
    p.add_argument("--system", required=True,
                   choices=sorted(_SYSTEM_ALIASES))
    p.add_argument("--identity", required=True,
                   choices=identity_ids())
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify_virial)

    p = sub.add_parser("nlkg-check",
                       help="second-order residual monitor on a run")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_nlkg_check)

    p = sub.add_parser("emit-exact",
                       help="tabulate an exact solution on a grid")
    p.add_argument("--solution", default="thirring")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--time", type=float, default=0.0)
    p.add_argument("--x-min", type=float, default=-40.0)
    p.add_argument("--x-max", type=float, default=40.0)
    p.add_argument("--n-points", type=int, default=1601)
    p.add_argument("--file", default="exact_thirring.csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_emit_exact)

    p = sub.add_parser("emit-plots",
                       help="write plotting scripts for existing tables")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=_cmd_emit_plots)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
