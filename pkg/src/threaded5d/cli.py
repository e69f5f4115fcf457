"""Command-line front end.

Exit codes: 0 success, 1 validation or classification failure, 2 bad
configuration or expression, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

import numpy as np

from . import classify, geodesic, jsonio
from .connection import connection_sample
from .errors import ConfigError, NumericalError
from .kinematics import kinematic_sample
from .scenario import Scenario, load_scenario
from .validate import default_points, run_battery

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_VELOCITY = (1.0, 0.3, -0.2, 0.1, 0.25)


def _vec5(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if len(values) != 5:
        raise argparse.ArgumentTypeError(f"expected 5 comma-separated numbers, got {len(values)}")
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="threaded5d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, *flags):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", help="output file (default: stdout)")
        for flag in flags:
            flag(p)
        return p

    point = lambda p: p.add_argument("--point", type=_vec5, help="c0,c1,c2,c3,c4")

    def integration(p):
        p.add_argument("--t0", type=float)
        p.add_argument("--t1", type=float)
        p.add_argument("--step", type=float)
        p.add_argument("--tol", type=float)
        p.add_argument("--integrator", choices=geodesic.INTEGRATORS)
        p.add_argument("--variant", choices=geodesic.VARIANTS)

    add("kinematics", "kinematic quantities at a point", point)
    add("connection", "spatial connection and Levi-Civita table at a point", point)
    add("integrate", "integrate the threaded equations of motion to CSV", integration)
    add(
        "classify",
        "classify a trajectory CSV",
        lambda p: p.add_argument("--trajectory", required=True),
        lambda p: p.add_argument("--tol", type=float),
    )
    add("validate", "run the cross-check battery", point, integration)
    add("critical-points", "critical points of the rw5 warping function", lambda p: p.add_argument("--tol", type=float))
    return parser


def _point(args, sc: Scenario) -> np.ndarray:
    if getattr(args, "point", None) is not None:
        return np.array(args.point)
    if sc.get("point") is not None:
        return np.array(sc.get("point"), dtype=float)
    init = sc.get("initial")
    if init is not None:
        return np.array(init["point"], dtype=float)
    raise ConfigError("no evaluation point: pass --point or set 'point' in the scenario")


def _integration_opts(args, sc: Scenario) -> dict:
    cfg = sc.get("integrator") or {}
    span = sc.get("t_span") or [0.0, 1.0]
    return {
        "t_span": (
            args.t0 if args.t0 is not None else span[0],
            args.t1 if args.t1 is not None else span[1],
        ),
        "integrator": args.integrator or cfg.get("method", "rk4"),
        "step": args.step if args.step is not None else cfg.get("step", 1e-3),
        "tol": args.tol if args.tol is not None else cfg.get("tol", 1e-9),
        "variant": args.variant or cfg.get("variant", "derived"),
    }


def _initial(sc: Scenario, args) -> geodesic.GeodesicState:
    state = sc.initial_state()
    if state is None:
        p = _point(args, sc)
        state = geodesic.state_from_natural(sc.metric, p, DEFAULT_VELOCITY)
    return state


def _cmd_kinematics(args, sc, out):
    p = _point(args, sc)
    out.write(jsonio.dumps({"point": p, **kinematic_sample(sc.metric, p).to_dict()}) + "\n")
    return EXIT_OK


def _cmd_connection(args, sc, out):
    p = _point(args, sc)
    c = connection_sample(sc.metric, p)
    doc = {
        "point": p,
        "gamma_spatial": c.gamma_spatial,
        "gamma_0": c.gamma_0,
        "gamma_4": c.gamma_4,
        "lc_table": {name: row.to_dict() for name, row in c.lc_table.items()},
    }
    out.write(jsonio.dumps(doc) + "\n")
    return EXIT_OK


def _cmd_integrate(args, sc, out):
    traj = geodesic.integrate(sc.metric, _initial(sc, args), **_integration_opts(args, sc))
    geodesic.write_csv(traj, out)
    return EXIT_OK


def _cmd_classify(args, sc, out):
    try:
        traj = geodesic.read_csv(args.trajectory)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load trajectory {args.trajectory}: {exc}") from None
    tol = args.tol if args.tol is not None else sc.get("tolerance", classify.DEFAULT_TOL)
    report = classify.classify_curve(sc.metric, traj, tol)
    if sc.get("region") is not None:
        region = classify.Box(sc.get("region")["lo"], sc.get("region")["hi"])
        kb = classify.killing_bundle_check(sc.metric, region, sc.get("grid") or (3,) * 5, tol)
        report.add("killing_bundle", max(kb.max_theta, kb.max_kappa), tol)
        report.notes["killing_bundle_nodes"] = kb.nodes
    out.write(jsonio.dumps(report.to_dict()) + "\n")
    return EXIT_OK if report.verdicts["spatial_geodesic"] else EXIT_FAIL


def _cmd_validate(args, sc, out):
    opts = _integration_opts(args, sc)
    state = _initial(sc, args)
    if sc.get("points"):
        points = [np.array(p, dtype=float) for p in sc.get("points")]
    else:
        points = default_points(state.point)
    result = run_battery(sc.metric, state, points, opts["t_span"], opts["step"])
    if args.out:
        out.write(jsonio.dumps(result.to_dict()) + "\n")
        print(result.table())
    else:
        out.write(result.table() + "\n")
    return EXIT_OK if result.passed else EXIT_FAIL


def _cmd_critical_points(args, sc, out):
    if sc.metric.f is None:
        raise ConfigError("critical-points needs an rw5 metric with a warping function f")
    cfg = sc.get("critical_points")
    if cfg is None:
        raise ConfigError("scenario lacks a 'critical_points' section with a domain")
    tol = args.tol if args.tol is not None else cfg.get("tol", 1e-10)
    found = classify.rw_critical_points(sc.metric.f, cfg["domain"], cfg.get("grid", (41, 41)), tol)
    out.write(jsonio.dumps([{"c": p.c, "k": p.k, "residual": p.residual} for p in found]) + "\n")
    return EXIT_OK


COMMANDS = {
    "kinematics": _cmd_kinematics,
    "connection": _cmd_connection,
    "integrate": _cmd_integrate,
    "classify": _cmd_classify,
    "validate": _cmd_validate,
    "critical-points": _cmd_critical_points,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = io.StringIO()
    try:
        sc = load_scenario(args.config)
        code = COMMANDS[args.command](args, sc, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(out.getvalue())
    else:
        sys.stdout.write(out.getvalue())
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
