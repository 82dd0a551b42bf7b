"""Command-line front end.

Exit codes: 0 on success, 2 on a usage error, 1 on a domain error (the
error class name is printed on standard error).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import oracle, workspace
from .coupling import ellipse_samples, iso_orientation_ellipse
from .errors import MultipleFeasible, NoFeasibleSolution, VerneError
from .fk import RESIDUAL_TOL, fk_parallel
from .ik import feasibility_report, filter_feasible, ik_machine, ik_parallel
from .params import load_params, reference_params
from .transforms import TableOrientation, ToolPose, tool_pose_from_platform

log = logging.getLogger("verne")


def fmt(v) -> str:
    """12 significant digits, no negative zero, locale independent."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, str):
        return v
    return format(float(v) + 0.0, ".12g")


def _writer(out):
    return csv.writer(out, lineterminator="\n")


def _params(args):
    path = args.params or os.environ.get("VERNE_PARAMS")
    return load_params(Path(path)) if path else reference_params()


# subcommands

def cmd_validate(args, out) -> int:
    p = _params(args)
    out.write(f"ok: R1={fmt(p.R1)} r1={fmt(p.r1)} L1={fmt(p.L1)} L2={fmt(p.L2)} L3={fmt(p.L3)}\n")
    return 0


IK_HEADER = ("row", "angle", "alpha", "x", "y", "z", "theta1", "theta2", "rho1", "rho2", "rho3",
             "branch1", "branch2", "branch3", "res11", "res12", "res2", "res3", "residual_ok",
             "slider_above", "rod_crossing", "stroke", "serial_singularity", "orientation_in_range",
             "feasible")


def _ik_row(kind, c, rep, tol):
    t1 = "" if c.theta1 is None else fmt(c.theta1)
    t2 = "" if c.theta2 is None else fmt(c.theta2)
    return (kind, fmt(c.angle), fmt(c.alpha), *map(fmt, c.pose[:3]), t1, t2, *map(fmt, c.rho),
            *c.branch, *map(fmt, c.residuals), fmt(bool(np.max(np.abs(c.residuals)) < tol)),
            fmt(all(rep.slider_above)), fmt(rep.rod_crossing), fmt(all(rep.stroke)),
            fmt(all(rep.serial_singularity)), fmt(rep.orientation_in_range), fmt(rep.feasible))


def cmd_ik(args, out) -> int:
    p = _params(args)
    if args.tool_frame:
        cands = ik_machine(ToolPose(args.x, args.y, args.z, args.phi1, args.phi2), p)
    else:
        cands = ik_parallel(args.x, args.y, args.z, p)
    reports = [feasibility_report(c, p) for c in cands]
    w = _writer(out)
    w.writerow(IK_HEADER)
    for c, r in zip(cands, reports):
        w.writerow(_ik_row("candidate", c, r, args.tol))
    log.info("%d candidates", len(cands))
    try:
        survivor, _ = filter_feasible(cands, p)
    except (NoFeasibleSolution, MultipleFeasible):
        out.flush()
        raise
    w.writerow(_ik_row("survivor", survivor, feasibility_report(survivor, p), args.tol))
    return 0


FK_HEADER = ("alpha", "x", "y", "z", "leg1", "leg2", "leg3", "machine_reachable", "source",
             "singular", "res11", "res12", "res2", "res3", "residual_ok")
TOOL_COLUMNS = ("X", "Y", "Z", "phi1", "phi2")


def cmd_fk(args, out) -> int:
    p = _params(args)
    rho = (args.rho1, args.rho2, args.rho3)
    with_tool = args.theta1 is not None or args.theta2 is not None
    orient = TableOrientation(args.theta1 or 0.0, args.theta2 or 0.0)
    sols = fk_parallel(rho, p)
    w = _writer(out)
    w.writerow(FK_HEADER + (TOOL_COLUMNS if with_tool else ()))
    for s in sols:
        row = (fmt(s.pose.alpha), *map(fmt, s.pose[:3]), *s.mode.legs, fmt(s.mode.machine_reachable), s.source,
               fmt(s.singular), *map(fmt, s.residuals),
               fmt(bool(np.max(np.abs(s.residuals)) < args.tol)))
        if with_tool:
            row += tuple(map(fmt, tool_pose_from_platform(s.pose, orient, p)))
        w.writerow(row)
    log.info("%d assembly modes, %d machine-reachable", len(sols),
             sum(s.mode.machine_reachable for s in sols))
    return 0


def cmd_ellipse(args, out) -> int:
    p = _params(args)
    e = iso_orientation_ellipse(args.alpha, p)
    w = _writer(out)
    w.writerow(("alpha", "center_x", "a", "b", "major_axis"))
    w.writerow((fmt(e.alpha), fmt(e.center_x), fmt(e.a), fmt(e.b), e.major_axis))
    if args.samples:
        out.write("\n")
        w.writerow(("x", "y"))
        for x, y in zip(*ellipse_samples(e, args.samples)):
            w.writerow((fmt(x), fmt(y)))
    return 0


def cmd_workspace(args, out) -> int:
    p = _params(args)
    lim = workspace.ConstraintLimits.from_params(p)
    steps = dict(alpha_steps=args.alpha_steps, z_steps=args.z_steps,
                 resolution=args.resolution, cell_size=args.cell)
    if args.frame == "table":
        grid = workspace.manufacturing_workspace(p, lim, args.delta, args.phi1, args.phi2, **steps)
    else:
        grid = workspace.full_workspace(p, lim, args.delta, **steps)
    summary = workspace.format_summary(grid)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        workspace.write_points_csv(grid, d / "points.csv")
        workspace.write_slices(grid, d / "slices")
        (d / "summary.txt").write_text(summary, encoding="utf-8")
    out.write(summary)
    return 0


def cmd_oracle(args, out) -> int:
    p = _params(args)
    w = _writer(out)
    if args.random:
        return _oracle_compare(args, p, w)
    if args.kind == "fk":
        _need(args, ("rho1", "rho2", "rho3"))
        res = oracle.oracle_fk((args.rho1, args.rho2, args.rho3), p, args.n)
        w.writerow(("alpha", "x", "y", "z"))
        for pose in res.poses:
            w.writerow((fmt(pose.alpha), *map(fmt, pose[:3])))
        for lo, hi in res.guard_bands:
            log.info("guard band [%s, %s]", fmt(lo), fmt(hi))
        return 0
    _need(args, ("x", "y", "z"))
    w.writerow(("alpha", "rho1", "rho2", "rho3", "branch1", "branch2", "branch3"))
    for a, rho, br in oracle.oracle_ik(args.x, args.y, args.z, p, args.n):
        w.writerow((fmt(a), *map(fmt, rho), *br))
    return 0


def _oracle_compare(args, p, w) -> int:
    """Count agreement between the oracle and the analytic solver on random inputs."""
    rng = np.random.default_rng(args.seed)
    w.writerow(("case", "input1", "input2", "input3", "analytic", "oracle", "max_diff"))
    for i in range(args.random):
        if args.kind == "fk":
            inp = rng.uniform(p.rho_min, p.rho_max)
            try:
                ana = sorted(s.pose.alpha for s in fk_parallel(inp, p))
            except VerneError:
                ana = []
            ora = sorted(q.alpha for q in oracle.oracle_fk(inp, p, args.n).poses)
        else:
            lim = workspace.ConstraintLimits.from_params(p)
            pts = workspace.full_workspace(p, lim).sweep.accepted_poses()
            inp = pts[rng.integers(len(pts))][:3]
            ana = sorted(c.alpha for c in ik_parallel(*inp, p))
            ora = sorted(c[0] for c in oracle.oracle_ik(*inp, p, args.n))
        diff = max((abs(a - b) for a, b in zip(ana, ora)), default=0.0) if len(ana) == len(ora) else math.inf
        w.writerow((i, *map(fmt, inp), len(ana), len(ora), fmt(diff)))
    return 0


def _need(args, names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise _Usage("missing " + ", ".join("--" + n for n in missing))


class _Usage(Exception):
    pass


# parser

def _common(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; SUPPRESS keeps them from resetting earlier values
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", default=d(None),
                        help="parameter file (default: $VERNE_PARAMS or the reference set)")
    common.add_argument("--tol", type=float, default=d(RESIDUAL_TOL),
                        help="residual threshold for the residual_ok column")
    common.add_argument("--out", default=d(None),
                        help="output file (ik, fk, ellipse, oracle) or directory (workspace)")
    common.add_argument("--seed", type=int, default=d(0), help="seed for randomized runs")
    common.add_argument("-q", "--quiet", action="store_true", default=d(False),
                        help="do not log counts on stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(suppress=True)
    ap = argparse.ArgumentParser(prog="verne", parents=[_common(suppress=False)],
                                 description="Kinematics of a hybrid 5-axis machine.")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="load and check a parameter file")

    ik = sub.add_parser("ik", parents=[common], help="inverse kinematics")
    ik.add_argument("--x", type=float, required=True)
    ik.add_argument("--y", type=float, required=True)
    ik.add_argument("--z", type=float, required=True)
    ik.add_argument("--phi1", type=float, default=0.0)
    ik.add_argument("--phi2", type=float, default=0.0)
    ik.add_argument("--tool-frame", action="store_true",
                    help="x, y, z and phi1, phi2 give the tool pose in the table frame")

    fk = sub.add_parser("fk", parents=[common], help="forward kinematics")
    fk.add_argument("--rho1", type=float, required=True)
    fk.add_argument("--rho2", type=float, required=True)
    fk.add_argument("--rho3", type=float, required=True)
    fk.add_argument("--theta1", type=float)
    fk.add_argument("--theta2", type=float)

    el = sub.add_parser("ellipse", parents=[common], help="iso-orientation ellipse")
    el.add_argument("--alpha", type=float, required=True)
    el.add_argument("--samples", type=int, default=0)

    ws = sub.add_parser("workspace", parents=[common], help="workspace by discretisation")
    ws.add_argument("--delta", type=float, default=0.0, help="tool length (mm)")
    ws.add_argument("--phi1", type=float, default=0.0)
    ws.add_argument("--phi2", type=float, default=0.0)
    ws.add_argument("--frame", choices=("base", "table"), default="base")
    ws.add_argument("--alpha-steps", type=int, default=workspace.DEFAULT_ALPHA_STEPS)
    ws.add_argument("--z-steps", type=int, default=workspace.DEFAULT_Z_STEPS)
    ws.add_argument("--resolution", type=int, default=workspace.DEFAULT_RESOLUTION)
    ws.add_argument("--cell", type=float, default=workspace.DEFAULT_CELL, help="voxel size (mm)")

    orc = sub.add_parser("oracle", parents=[common], help="brute-force reference solvers")
    orc.add_argument("kind", choices=("fk", "ik"))
    for name in ("rho1", "rho2", "rho3", "x", "y", "z"):
        orc.add_argument(f"--{name}", type=float)
    orc.add_argument("--n", type=int, default=oracle.DEFAULT_N, help="scan points")
    orc.add_argument("--random", type=int, default=0,
                     help="compare with the analytic solver on this many random inputs")
    return ap


COMMANDS = {"validate": cmd_validate, "ik": cmd_ik, "fk": cmd_fk, "ellipse": cmd_ellipse,
            "workspace": cmd_workspace, "oracle": cmd_oracle}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    for name in ("alpha_steps", "z_steps", "resolution"):
        if getattr(args, name, 2) < 2:
            ap.print_usage(sys.stderr)
            sys.stderr.write(f"verne: error: --{name.replace('_', '-')} must be >= 2\n")
            return 2
    to_file = args.out and args.command != "workspace"
    buf = io.StringIO() if to_file else sys.stdout
    try:
        code = COMMANDS[args.command](args, buf)
    except _Usage as exc:
        ap.print_usage(sys.stderr)
        sys.stderr.write(f"verne: error: {exc}\n")
        return 2
    except (VerneError, OSError) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        code = 1
    if to_file:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    return code


if __name__ == "__main__":
    sys.exit(main())
