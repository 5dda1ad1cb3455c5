"""Command-line front end: scenario files in, CSV time series out.

Commands: simulate, initial-branch, final-branch, check-admissible,
synthesize, verify.  Exit codes are the scripting contract:

    0  success (verify: all tolerances met)
    1  verify ran but at least one error exceeds its tolerance
    2  configuration problem (message names the offending field)
    3  solver failure (incompatible data, step trouble, horizon, ...)
    4  control-time infeasibility
    5  no admissible branch / size constraint violated
    6  continuity assertion failed while assembling a C1 control

All numbers are written with 17 significant digits so identical configs
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .branch import solve_final_branch
from .config import ConfigError, emit_config, load_config
from .control import synthesize_c01, synthesize_c1, verify_synthesis
from .errors import (
    C1SwitchViolation,
    ConstraintViolated,
    ContinuityFailure,
    DeadEnd,
    DebondError,
    IncompatibleTarget,
    InfeasibleTime,
)
from .forward import solve_front, solve_initial_branch
from .func1d import SampledFunction
from .model import ControlSignal, check_damping_bound, classify_final_state

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INFEASIBLE = 4
EXIT_DEAD_END = 5
EXIT_CONTINUITY = 6


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path, header, columns):
    rows = len(columns[0])
    lines = [",".join(header)]
    for i in range(rows):
        lines.append(",".join(_fmt(col[i]) for col in columns))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_keyvals(path, pairs):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in pairs:
            fh.write(f"{key}={value}\n")


def _outdir(cfg, args):
    directory = args.out or cfg.output.get("directory", "out")
    os.makedirs(directory, exist_ok=True)
    return directory


def _control_columns(control):
    grid = np.union1d(control.u.xs, control.uprime.xs)
    return grid, control.u(grid), control.uprime(grid)


def _front_csv(path, front):
    _write_csv(path, ["t", "ell", "ellprime"], [front.times, front.positions, front.speeds])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg, args):
    initial = cfg.build_initial()
    control = cfg.build_control()
    kappa = cfg.build_toughness()
    scfg = cfg.solver_config()
    sol = solve_front(initial, control, kappa, scfg)
    out = _outdir(cfg, args)

    _front_csv(os.path.join(out, "front.csv"), sol.front)
    trace = sol.trace_function()
    f_vals = np.array([sol.trace_value(s) for s in trace.xs])
    _write_csv(os.path.join(out, "trace.csv"), ["s", "f", "fprime"],
               [trace.xs, f_vals, trace.vs])
    grid, u_vals, up_vals = _control_columns(control)
    _write_csv(os.path.join(out, "control.csv"), ["t", "u", "uprime"],
               [grid, u_vals, up_vals])
    n = cfg.output.get("state_points", 512)
    xs = np.linspace(0.0, sol.front.ell(scfg.T), n + 1)
    y, dty, dxy = sol.reconstruct(scfg.T, xs)
    _write_csv(os.path.join(out, "state_at_T.csv"), ["x", "y", "dty", "dxy"],
               [xs, y, dty, dxy])
    return EXIT_OK


def cmd_initial_branch(cfg, args):
    initial = cfg.build_initial()
    kappa = cfg.build_toughness()
    res = solve_initial_branch(initial, kappa, cfg.solver_config())
    out = _outdir(cfg, args)
    _front_csv(os.path.join(out, "initial_branch.csv"), res.front)
    _write_keyvals(
        os.path.join(out, "initial_branch.txt"),
        [
            ("t_star", _fmt(res.t_star)),
            ("ell_star", _fmt(res.ell_star)),
            ("ell_star_prime", _fmt(res.ell_star_prime)),
            ("slope_authoritative", str(res.slope_authoritative).lower()),
        ],
    )
    return EXIT_OK


def cmd_final_branch(cfg, args):
    target = cfg.build_target()
    kappa = cfg.build_toughness()
    res = solve_final_branch(target, kappa, cfg.T, cfg.branch_policy())
    out = _outdir(cfg, args)
    f = res.front_segment
    _write_csv(os.path.join(out, "branch.csv"), ["t", "scriptL", "scriptLprime"],
               [f.times, f.positions, f.speeds])
    _write_keyvals(
        os.path.join(out, "final_branch.txt"),
        [
            ("t_bar_star", _fmt(res.t_bar_star)),
            ("ell_bar_star", _fmt(res.ell_bar_star)),
            ("ell_bar_star_prime", _fmt(res.ell_bar_star_prime)),
            ("alpha", _fmt(res.alpha)),
        ],
    )
    return EXIT_OK


def cmd_check_admissible(cfg, args):
    target = cfg.build_target(strict=False)
    kappa = cfg.build_toughness()
    rows = []

    res_fs = abs(target.ybar0(target.ellbar0))
    rows.append(("final_set_ybar0_vanishes", res_fs <= 1e-8, res_fs, 1e-8))

    damp = check_damping_bound(target, kappa(target.ellbar0))
    item = damp.items[0]
    rows.append(("damping_bound", item.passed, max(item.residual, 0.0), item.tol))

    if target.regularity == "C1":
        try:
            alpha = classify_final_state(target, kappa)
            rows.append(("terminal_classification", True, 0.0, 1e-8))
            rows.append(("alpha", True, alpha, 1.0))
        except IncompatibleTarget:
            rows.append(
                ("terminal_classification", False, abs(target.ybar1(target.ellbar0)), 1e-8)
            )

    out = _outdir(cfg, args)
    lines = ["check,passed,residual,tol"]
    for name, passed, residual, tol in rows:
        lines.append(f"{name},{str(passed).lower()},{_fmt(residual)},{_fmt(tol)}")
    with open(os.path.join(out, "admissibility.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK if all(r[1] for r in rows) else EXIT_VERIFY_FAILED


def _synthesize(cfg):
    initial = cfg.build_initial()
    target = cfg.build_target()
    kappa = cfg.build_toughness()
    scfg = cfg.solver_config()
    branch = solve_final_branch(target, kappa, cfg.T, cfg.branch_policy())
    c1 = initial.regularity == "C1" and target.regularity == "C1"
    synth = synthesize_c1 if c1 else synthesize_c01
    report = synth(initial, target, kappa, cfg.T, branch, scfg)
    return report, initial, target, kappa, scfg


def _emit_synthesis(report, out):
    grid, u_vals, up_vals = _control_columns(report.control)
    _write_csv(os.path.join(out, "control.csv"), ["t", "u", "uprime"],
               [grid, u_vals, up_vals])
    f = report.branch.front_segment
    _write_csv(os.path.join(out, "branch.csv"), ["t", "scriptL", "scriptLprime"],
               [f.times, f.positions, f.speeds])
    plan = report.plan
    s1, s2, s3 = report.stage_boundaries
    _write_keyvals(
        os.path.join(out, "plan.txt"),
        [
            ("case", plan.case),
            ("v", _fmt(plan.v)),
            ("delta", _fmt(plan.delta)),
            ("t_circ", _fmt(plan.t_circ)),
            ("t_star", _fmt(plan.t_star)),
            ("ell_star", _fmt(plan.ell_star)),
            ("ell_star_prime", _fmt(plan.ell_star_prime)),
            ("t_bar_star", _fmt(plan.t_bar_star)),
            ("ell_bar_star", _fmt(plan.ell_bar_star)),
            ("ell_bar_star_prime", _fmt(plan.ell_bar_star_prime)),
            ("alpha", _fmt(report.branch.alpha)),
            ("stage_s1", _fmt(s1)),
            ("stage_s2", _fmt(s2)),
            ("stage_s3", _fmt(s3)),
        ],
    )


def cmd_synthesize(cfg, args):
    report, *_ = _synthesize(cfg)
    _emit_synthesis(report, _outdir(cfg, args))
    return EXIT_OK


def _load_control_csv(path, regularity):
    table = np.genfromtxt(path, delimiter=",", names=True)
    return ControlSignal(
        SampledFunction(table["t"], table["u"]),
        SampledFunction(table["t"], table["uprime"]),
        regularity,
    )


def cmd_verify(cfg, args):
    out = _outdir(cfg, args)
    tol_front, tol_disp, tol_vel = cfg.verify_tolerances()
    if args.control_csv:
        initial = cfg.build_initial()
        target = cfg.build_target()
        kappa = cfg.build_toughness()
        scfg = cfg.solver_config()
        control = _load_control_csv(args.control_csv, initial.regularity)
        sol = solve_front(initial, control, kappa, scfg)
        ell_T = sol.front.ell(scfg.T)
        hi = min(ell_T, target.ellbar0)
        xs = np.linspace(0.0, hi, 401)
        y, dty, _ = sol.reconstruct(scfg.T, xs)
        margin = max(4.0 * scfg.h, 1e-3 * hi)
        inner = (xs >= margin) & (xs <= hi - margin)
        front_err = abs(ell_T - target.ellbar0)
        disp_err = float(np.max(np.abs(y - target.ybar0(xs))))
        vel_err = float(np.max(np.abs(dty[inner] - target.ybar1(xs[inner]))))
    else:
        report, initial, target, kappa, scfg = _synthesize(cfg)
        _emit_synthesis(report, out)
        result = verify_synthesis(report, initial, target, kappa, scfg)
        front_err = result.front_error
        disp_err = result.displacement_error
        vel_err = result.velocity_error

    rows = [
        ("front_error", front_err, tol_front),
        ("displacement_sup_error", disp_err, tol_disp),
        ("velocity_sup_interior_error", vel_err, tol_vel),
    ]
    lines = ["metric,value,tolerance,passed"]
    for name, value, tol in rows:
        lines.append(f"{name},{_fmt(value)},{_fmt(tol)},{str(value <= tol).lower()}")
    with open(os.path.join(out, "verify.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK if all(v <= t for _, v, t in rows) else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "simulate": cmd_simulate,
    "initial-branch": cmd_initial_branch,
    "final-branch": cmd_final_branch,
    "check-admissible": cmd_check_admissible,
    "synthesize": cmd_synthesize,
    "verify": cmd_verify,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="debond",
        description="Simulate and steer a 1D dynamic debonding front via boundary control.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario YAML file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--h", type=float, default=None, help="override the time step")
        p.add_argument(
            "--policy",
            choices=("prefer_static", "prefer_moving"),
            default=None,
            help="override the branch policy",
        )
        if name == "verify":
            p.add_argument(
                "--control-csv",
                default=None,
                help="replay this control file instead of synthesizing one",
            )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.h is not None:
            cfg.solver["h"] = args.h
        if args.policy is not None:
            cfg.branch["policy"] = args.policy
        code = _COMMANDS[args.command](cfg, args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleTime as err:
        print(f"error: infeasible control time: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DeadEnd, ConstraintViolated, C1SwitchViolation) as err:
        print(f"error: no admissible branch: {err}", file=sys.stderr)
        return EXIT_DEAD_END
    except ContinuityFailure as err:
        print(f"error: continuity assertion failed: {err}", file=sys.stderr)
        return EXIT_CONTINUITY
    except (DebondError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    return code


if __name__ == "__main__":
    sys.exit(main())
