"""Inverse kinematics of the parallel module and of the whole machine.

The orientation is solved first.  Eliminating the leg I slider between its
two rod equations gives a trigonometric relation of degree three in the
orientation angle.  The tangent half-angle substitution turns that relation
into a polynomial of degree six, which is recovered from samples.  For each
real orientation, every leg contributes a quadratic in its slider
coordinate.  All root combinations are enumerated.  Leg I keeps only the
roots that are common to both of its rods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .constraints import closed_form_residuals, normalized
from .coupling import coupling_residual_scaled
from .errors import DegenerateTarget, MultipleFeasible, NoFeasibleSolution, Unreachable
from .params import JointCoords, MachineParams
from .polyroots import chebyshev_interpolator, real_roots, trim
from .transforms import PlatformPose, ToolPose, platform_attachments, slider_attachments, wrap_angle

RHO1_MATCH_TOL = 1e-7  # mm
_ROOT_WINDOW = 1.0 + 1e-9  # charts overlap slightly at |t| = 1
_DEDUP_TOL = 1e-9
_RADICAND_SLACK = 1e-12  # relative to L^2
_TOUCH_TOL = 1e-13  # |g| accepted as a root at alpha = 0 or pi
_TOUCH_MERGE = 1e-6  # polynomial roots this close to a touch angle are its split images

UPPER, LOWER = "upper", "lower"


@dataclass(frozen=True)
class IkCandidate:
    """One inverse-kinematics solution.

    ``branch`` holds one tag per leg: ``upper`` for the slider root with the
    smaller z (slider above its platform joint), ``lower`` for the other one.
    ``residuals`` are the four closed-form residuals divided by ``L_i^2``.
    """

    alpha: float
    pose: PlatformPose
    rho: JointCoords
    branch: tuple[str, str, str]
    residuals: np.ndarray = field(compare=False, repr=False)
    theta1: float | None = None
    theta2: float | None = None

    @property
    def angle(self) -> float:
        return self.alpha if self.theta1 is None else self.theta1

    def sort_key(self):
        return (self.angle, self.branch)


@dataclass(frozen=True)
class FeasibilityReport:
    slider_above: tuple[bool, bool, bool]
    rod_crossing: bool  # True when R1 cos(alpha) > r1, i.e. no crossing
    stroke: tuple[bool, bool, bool]
    serial_singularity: tuple[bool, bool, bool]
    orientation_in_range: bool

    @property
    def feasible(self) -> bool:
        return (all(self.slider_above) and self.rod_crossing and all(self.stroke)
                and all(self.serial_singularity) and self.orientation_in_range)

    def failures(self) -> list[str]:
        out = []
        for name in ("slider_above", "stroke", "serial_singularity"):
            out += [f"{name}[{i + 1}]" for i, ok in enumerate(getattr(self, name)) if not ok]
        if not self.rod_crossing:
            out.append("rod_crossing")
        if not self.orientation_in_range:
            out.append("orientation_in_range")
        return out


# orientation relation

def _tool_platform_xyz(tool: ToolPose, theta1, p: MachineParams):
    """Platform centre for table angle ``theta1`` and ``theta2 = -phi2``; vectorised in theta1."""
    c2, s2 = math.cos(tool.phi2), math.sin(tool.phi2)
    sp1, cp1 = math.sin(tool.phi1), math.cos(tool.phi1)
    px = tool.X + p.delta * sp1 * s2
    py = tool.Y - p.delta * sp1 * c2
    pz = tool.Z + p.delta * cp1
    qx = c2 * px + s2 * py
    qy = s2 * px - c2 * py
    qz = p.d_t - pz
    if np.ndim(theta1):
        ct, st = np.cos(theta1), np.sin(theta1)
        qx = qx + 0.0 * ct
    else:
        ct, st = math.cos(theta1), math.sin(theta1)
    return qx, ct * qy - st * qz, p.d_a + st * qy + ct * qz


def _orientation_function(target, p: MachineParams):
    """Scaled leg I relation as a function of the unknown angle (alpha or theta1).

    Accepts scalars or arrays; scalars take a ``math`` path because the
    root polisher calls this many times.
    """
    R1sq, r1, e1, L1sq = p.R1**2, p.r1, p.e1, p.L1**2
    scale = R1sq * L1sq
    two_R1r1 = 2.0 * p.R1 * p.r1
    base = R1sq + r1 * r1
    if isinstance(target, ToolPose):
        tool = target

        def g(theta1):
            if np.ndim(theta1):
                x, y, _ = _tool_platform_xyz(tool, theta1, p)
                return coupling_residual_scaled(x, y, theta1 + tool.phi1, p)
            x, y, _ = _tool_platform_xyz(tool, theta1, p)
            a = theta1 + tool.phi1
            s2 = math.sin(a) ** 2
            k = base - two_R1r1 * math.cos(a)
            return (R1sq * s2 * (x + e1) ** 2 + k * y * y - R1sq * s2 * (L1sq - k)) / scale
        return g
    x, y = float(target[0]), float(target[1])

    def g(a):
        if np.ndim(a):
            return coupling_residual_scaled(x, y, a, p)
        s2 = math.sin(a) ** 2
        k = base - two_R1r1 * math.cos(a)
        return (R1sq * s2 * (x + e1) ** 2 + k * y * y - R1sq * s2 * (L1sq - k)) / scale
    return g


def _chart_polynomial(g, offset: float) -> np.ndarray:
    """Coefficients in ``t = tan((angle - offset) / 2)`` of ``g * (1 + t^2)^3``."""
    t, inv = chebyshev_interpolator(7)
    vals = g(offset + 2.0 * np.arctan(t)) * (1.0 + t * t) ** 3
    return inv @ vals


def orientation_polynomial(target, p: MachineParams) -> np.ndarray:
    """Ascending degree-6 coefficients (length 7) in ``t = tan(angle / 2)``.

    ``target`` is either a platform position ``(x, y, z)``, where the angle is
    alpha, or a :class:`ToolPose`, where the angle is theta1.
    """
    c = _chart_polynomial(_orientation_function(target, p), 0.0)
    if len(trim(c)) == 0:
        raise DegenerateTarget("leg I relation vanishes for every orientation")
    return c


def _polish(g, a0: float, h: float = 1e-6) -> float:
    lo, hi = a0 - h, a0 + h
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo > 0) != (ghi > 0):
        return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return a0  # even-multiplicity root: no bracket


def orientation_roots(target, p: MachineParams) -> list[float]:
    """All real orientation angles in (-pi, pi], sorted.

    Two half-angle charts are used, one centred on 0 and one on pi, and each
    keeps only roots with ``|t| <= 1``.  This keeps every root inside a
    well-conditioned window and makes the angle ``pi`` an ordinary root.
    """
    g = _orientation_function(target, p)
    found: list[float] = []
    for offset in (0.0, math.pi):
        c = _chart_polynomial(g, offset)
        if len(trim(c)) == 0:
            raise DegenerateTarget("leg I relation vanishes for every orientation")
        for r in real_roots(c, exact_polish=False):
            if abs(r.value) <= _ROOT_WINDOW:
                found.append(_polish(g, offset + 2.0 * math.atan(r.value)))
    if isinstance(target, ToolPose):
        special = (wrap_angle(-target.phi1), wrap_angle(math.pi - target.phi1))
    else:
        special = (0.0, math.pi)
    # alpha = 0 or pi at y = 0 is a double root that rounding may split or drop
    hits = [a for a in special if abs(float(g(a))) <= _TOUCH_TOL]
    found = [a for a in found if all(abs(wrap_angle(a - h)) > _TOUCH_MERGE for h in hits)] + hits
    found = sorted(wrap_angle(a) for a in found)
    out: list[float] = []
    for a in found:
        if out and abs(a - out[-1]) <= _DEDUP_TOL:
            continue
        out.append(a)
    if len(out) > 1 and abs(out[0] + math.pi) <= _DEDUP_TOL and out[-1] == math.pi:
        out.pop(0)
    return out


# per-leg quadratics

def _quadratic_roots(centre: float, radicand: float, L: float) -> list[tuple[float, str]]:
    if radicand < -_RADICAND_SLACK * L * L:
        return []
    r = math.sqrt(max(radicand, 0.0))
    return [(centre - r, UPPER), (centre + r, LOWER)]


def _leg_roots(pose: PlatformPose, p: MachineParams):
    x, y, z, a = pose
    c, s = math.cos(a), math.sin(a)
    u, v = p.R1 * c - p.r1, p.R1 * s
    w, q = p.R2 * c - p.r4, p.R2 * s
    X1, X2 = x + p.e1, x + p.e2
    rod11 = _quadratic_roots(z + v, p.L1**2 - X1**2 - (y + u) ** 2, p.L1)
    rod12 = _quadratic_roots(z - v, p.L1**2 - X1**2 - (y - u) ** 2, p.L1)
    leg1 = [(r, tag) for r, tag in rod11
            if any(abs(r - r2) <= RHO1_MATCH_TOL for r2, _ in rod12)]
    leg2 = _quadratic_roots(z - q, p.L2**2 - X2**2 - (y - w) ** 2, p.L2)
    leg3 = _quadratic_roots(z + q, p.L3**2 - X2**2 - (y + w) ** 2, p.L3)
    return leg1, leg2, leg3


def _enumerate(pose: PlatformPose, p: MachineParams, theta1=None, theta2=None) -> list[IkCandidate]:
    leg1, leg2, leg3 = _leg_roots(pose, p)
    out = []
    for r1, t1 in leg1:
        for r2, t2 in leg2:
            for r3, t3 in leg3:
                rho = JointCoords(r1, r2, r3)
                res = normalized(closed_form_residuals(pose, rho, p), p)
                out.append(IkCandidate(pose.alpha, pose, rho, (t1, t2, t3), res, theta1, theta2))
    return out


def ik_parallel(x: float, y: float, z: float, p: MachineParams) -> list[IkCandidate]:
    """Every solution of the module's inverse problem, sorted by alpha then branch."""
    cands: list[IkCandidate] = []
    for a in orientation_roots((x, y, z), p):
        cands += _enumerate(PlatformPose(x, y, z, a), p)
    if not cands:
        raise Unreachable(f"no real orientation or leg solution at ({x}, {y}, {z})")
    return sorted(cands, key=IkCandidate.sort_key)


def ik_machine(tool: ToolPose, p: MachineParams) -> list[IkCandidate]:
    """Inverse problem of the whole machine; ``theta2`` is fixed to ``-phi2``."""
    theta2 = -tool.phi2
    cands: list[IkCandidate] = []
    for t1 in orientation_roots(tool, p):
        x, y, z = (float(v) for v in _tool_platform_xyz(tool, t1, p))
        pose = PlatformPose(x, y, z, wrap_angle(t1 + tool.phi1))
        cands += _enumerate(pose, p, t1, theta2)
    if not cands:
        raise Unreachable("no real table angle or leg solution for this tool pose")
    return sorted(cands, key=IkCandidate.sort_key)


# feasibility

def slider_above(z_slider: float, z_platform: float) -> bool:
    """z points down, so "above" means a smaller base-frame z."""
    return z_slider < z_platform


def feasibility_report(cand: IkCandidate, p: MachineParams) -> FeasibilityReport:
    A = slider_attachments(cand.rho, p)
    B = platform_attachments(cand.pose, p)
    d = B - A
    L = np.linalg.norm(d, axis=1)
    sin_margin = math.sin(p.singularity_margin)
    above = tuple(bool(slider_above(A[2 * i, 2], B[2 * i, 2]) and slider_above(A[2 * i + 1, 2], B[2 * i + 1, 2]))
                  for i in range(3))
    sing = tuple(bool(min(d[2 * i, 2] / L[2 * i], d[2 * i + 1, 2] / L[2 * i + 1]) >= sin_margin)
                 for i in range(3))
    stroke = tuple(bool(lo <= r <= hi) for r, lo, hi in zip(cand.rho, p.rho_min, p.rho_max))
    crossing_ok = p.R1 * math.cos(cand.pose.alpha) > p.r1
    in_range = True
    if cand.theta1 is not None:
        lo, hi = p.theta1_range
        in_range = lo <= cand.theta1 <= hi
    return FeasibilityReport(above, crossing_ok, stroke, sing, in_range)


def filter_feasible(cands, p: MachineParams) -> tuple[IkCandidate, list[FeasibilityReport]]:
    """The single candidate passing every check, plus one report per candidate.

    Raises :class:`NoFeasibleSolution` when none passes and
    :class:`MultipleFeasible` when more than one does.
    """
    cands = list(cands)
    reports = [feasibility_report(c, p) for c in cands]
    survivors = [c for c, r in zip(cands, reports) if r.feasible]
    if not survivors:
        raise NoFeasibleSolution(reports)
    if len(survivors) > 1:
        raise MultipleFeasible(survivors, reports)
    return survivors[0], reports
