"""Forward kinematics of the parallel module: slider positions to platform poses.

For a fixed orientation alpha the rod equations reduce to three linear ones
in (x, y, z) plus one quadratic:

* rod 11 minus rod 12 is linear in y and z,
* leg II minus leg III is linear in y and z,
* rod 11 minus leg II is linear in x, y and z,
* rod 11 itself closes the system.

Solving the linear part and substituting into rod 11 leaves one scalar
function of alpha.  Multiplied by the squared 2x2 determinant it becomes a
trigonometric polynomial, and ``(1 + s^2)^4`` times that is an octic in
``s = tan(alpha / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .constraints import closed_form_residuals, normalized
from .errors import DegenerateInput, NoAssembly, SingularDenominator
from .params import JointCoords, MachineParams
from .polyroots import chebyshev_interpolator, real_roots, trim
from .transforms import (PlatformPose, TableOrientation, ToolPose, platform_attachments,
                         slider_attachments, tool_pose_from_platform, wrap_angle)

GUARD_RTOL = 1e-8
RESIDUAL_TOL = 1e-9
_ROOT_WINDOW = 1.0 + 1e-9
_DEDUP_TOL = 1e-7  # rad / mm

# labels for SingularDenominator.which
Y_ELIMINATION = "y_elimination"  # R1 cos(alpha) - r1 = 0
Z_ELIMINATION = "z_elimination"  # leg II / leg III determinant = 0


def guard_scales(rho, p: MachineParams) -> tuple[float, float]:
    """Thresholds below which the two elimination denominators count as zero.

    The y denominator is a length, the z denominator an area, so each gets
    its own natural scale.
    """
    eps_y = GUARD_RTOL * (p.R1 + p.r1)
    area = (p.R1 + p.r1) * abs(rho[1] - rho[2]) + 2.0 * (p.r4 * p.R1 + p.r1 * p.R2)
    return eps_y, GUARD_RTOL * area


def _area_scale(rho, p: MachineParams) -> float:
    return guard_scales(rho, p)[1] / GUARD_RTOL


def _linear_terms(c, s, rho, p: MachineParams):
    """Numerators and determinant of the linear part; works on scalars or arrays."""
    p1, p2, p3 = rho
    u, v = p.R1 * c - p.r1, p.R1 * s
    w, q = p.R2 * c - p.r4, p.R2 * s
    g = p3 - p2 - 2.0 * q
    b2 = p.L2**2 - p.L3**2 + g * (p2 + p3)
    det = 2.0 * u * g + 4.0 * w * v
    yn = v * (2.0 * p1 * g - b2)
    zn = u * b2 + 4.0 * w * v * p1
    k = (p.e1**2 - p.e2**2 + u * u - w * w + (v - p1) ** 2 - (q + p2) ** 2
         - p.L1**2 + p.L2**2)
    xn = -(2.0 * yn * (u + w) + 2.0 * zn * (v - p1 + q + p2) + det * k) / (2.0 * (p.e1 - p.e2))
    return u, v, det, xn, yn, zn


def elimination_residual(alpha, rho, p: MachineParams):
    """``f(alpha) * det(alpha)^2``, dimensionless; zero exactly at assembly-mode orientations.

    ``f`` is the rod 11 residual at the back-substituted position.  The
    determinant factor removes the poles, so this is a smooth trigonometric
    polynomial of degree four.
    """
    if np.ndim(alpha):
        c, s = np.cos(alpha), np.sin(alpha)
    else:
        c, s = math.cos(alpha), math.sin(alpha)
    u, v, det, xn, yn, zn = _linear_terms(c, s, rho, p)
    F = ((xn + p.e1 * det) ** 2 + (yn + u * det) ** 2 + (zn + (v - rho[0]) * det) ** 2
         - p.L1**2 * det**2)
    return F / (_area_scale(rho, p) ** 2 * p.L1**2)


def fk_back_substitute(alpha: float, rho, p: MachineParams) -> PlatformPose:
    """Position for a given orientation through the elimination chain.

    z comes from the leg II / leg III difference combined with the leg I
    difference, y from the leg I difference, x from rod 11 minus leg II.
    The result may still violate rod 11 itself; callers check residuals.
    """
    p1, p2, p3 = rho
    c, s = math.cos(alpha), math.sin(alpha)
    eps_y, eps_z = guard_scales(rho, p)
    u = p.R1 * c - p.r1
    if abs(u) < eps_y:
        raise SingularDenominator(Y_ELIMINATION, u)
    den_z = (p2 - p3) * u + 2.0 * s * (p.r4 * p.R1 - p.r1 * p.R2)
    if abs(den_z) < eps_z:
        raise SingularDenominator(Z_ELIMINATION, den_z)
    u, v, det, xn, yn, zn = _linear_terms(c, s, rho, p)
    w, q = p.R2 * c - p.r4, p.R2 * s
    z = zn / det
    y = -v * (z - p1) / u
    k = (p.e1**2 - p.e2**2 + u * u - w * w + (v - p1) ** 2 - (q + p2) ** 2
         - p.L1**2 + p.L2**2)
    x = -(2.0 * y * (u + w) + 2.0 * z * (v - p1 + q + p2) + k) / (2.0 * (p.e1 - p.e2))
    return PlatformPose(x, y, z, wrap_angle(alpha))


def solve_at_orientation(alpha: float, rho, p: MachineParams) -> list[PlatformPose]:
    """All positions with orientation ``alpha``, without dividing by either denominator.

    The three linear equations are solved by SVD.  When they are rank
    deficient, the solution set is a line and rod 11 cuts it in up to two
    points.  This is the fallback used inside the guard bands.
    """
    p1, p2, p3 = rho
    c, s = math.cos(alpha), math.sin(alpha)
    u, v = p.R1 * c - p.r1, p.R1 * s
    w, q = p.R2 * c - p.r4, p.R2 * s
    g = p3 - p2 - 2.0 * q
    b2 = p.L2**2 - p.L3**2 + g * (p2 + p3)
    k = (p.e1**2 - p.e2**2 + u * u - w * w + (v - p1) ** 2 - (q + p2) ** 2
         - p.L1**2 + p.L2**2)
    M = np.array([
        [0.0, u, v],
        [0.0, -4.0 * w, 2.0 * g],
        [2.0 * (p.e1 - p.e2), 2.0 * (u + w), 2.0 * (v - p1 + q + p2)],
    ])
    rhs = np.array([v * p1, b2, -k])
    row = np.linalg.norm(M, axis=1)
    row[row == 0.0] = 1.0
    M, rhs = M / row[:, None], rhs / row
    U, S, Vt = np.linalg.svd(M)
    centre = np.array([-p.e1, -u, p1 - v])
    pts: list[np.ndarray] = []
    if S[-1] > 1e-10 * S[0]:
        pts.append(np.linalg.solve(M, rhs))
    elif S[1] > 1e-10 * S[0]:
        X0 = Vt[:2].T @ ((U[:, :2].T @ rhs) / S[:2])
        n = Vt[2]
        d = X0 - centre
        bq = float(d @ n)
        disc = bq * bq - (float(d @ d) - p.L1**2)
        if disc >= -1e-12 * p.L1**2:
            r = math.sqrt(max(disc, 0.0))
            pts += [X0 + (-bq - r) * n, X0 + (-bq + r) * n]
    out = []
    for x, y, z in pts:
        pose = PlatformPose(float(x), float(y), float(z), wrap_angle(alpha))
        if np.max(np.abs(normalized(closed_form_residuals(pose, rho, p), p))) < RESIDUAL_TOL:
            out.append(pose)
    return out


def _chart_octic(rho, p: MachineParams, offset: float) -> np.ndarray:
    s, inv = chebyshev_interpolator(9)
    vals = elimination_residual(offset + 2.0 * np.arctan(s), rho, p) * (1.0 + s * s) ** 4
    return inv @ vals


def fk_octic(rho, p: MachineParams) -> np.ndarray:
    """Ascending coefficients (length 9) of the octic in ``s = tan(alpha / 2)``."""
    c = _chart_octic(rho, p, 0.0)
    if len(trim(c)) == 0:
        raise DegenerateInput("eliminated equation vanishes for every orientation")
    return c


def special_orientations(rho, p: MachineParams) -> list[float]:
    """Orientations where an elimination denominator vanishes exactly."""
    out = []
    if abs(p.r1) <= p.R1:
        a = math.acos(p.r1 / p.R1)
        out += [a, -a]
    # (p2 - p3) (R1 c - r1) + 2 s K = 0  ->  A c + B s = C
    K = p.r4 * p.R1 - p.r1 * p.R2
    A, B, C = (rho[1] - rho[2]) * p.R1, 2.0 * K, (rho[1] - rho[2]) * p.r1
    amp = math.hypot(A, B)
    if amp > 0 and abs(C) <= amp:
        base, off = math.atan2(B, A), math.acos(C / amp)
        out += [base + off, base - off]
    return sorted({wrap_angle(a) for a in out})


def _polish(F, a0: float, h: float = 1e-7) -> float:
    lo, hi = a0 - h, a0 + h
    flo, fhi = F(lo), F(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) != (fhi > 0):
        return brentq(F, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return a0


def octic_orientations(rho, p: MachineParams) -> list[float]:
    """Polished real roots of the octic over both half-angle charts, in (-pi, pi]."""
    def F(a):
        return elimination_residual(a, rho, p)

    found = []
    for offset in (0.0, math.pi):
        c = _chart_octic(rho, p, offset)
        if len(trim(c)) == 0:
            raise DegenerateInput("eliminated equation vanishes for every orientation")
        for r in real_roots(c, exact_polish=False):
            if abs(r.value) <= _ROOT_WINDOW:
                found.append(wrap_angle(_polish(F, offset + 2.0 * math.atan(r.value))))
    return sorted(found)


@dataclass(frozen=True)
class AssemblyMode:
    legs: tuple[str, str, str]  # "above" / "below" per leg
    machine_reachable: bool


@dataclass(frozen=True)
class FkSolution:
    pose: PlatformPose
    mode: AssemblyMode
    residuals: np.ndarray = field(compare=False, repr=False)
    y_guard_distance: float = 0.0  # |R1 cos(alpha) - r1| / guard
    z_guard_distance: float = 0.0
    source: str = "octic"  # or "special"

    @property
    def singular(self) -> bool:
        return self.y_guard_distance < 1.0 or self.z_guard_distance < 1.0


def classify_assembly_mode(pose: PlatformPose, rho, p: MachineParams) -> AssemblyMode:
    """Per-leg slider-above labels; machine-reachable needs all above, stroke and no rod crossing."""
    A = slider_attachments(rho, p)
    B = platform_attachments(pose, p)
    legs = tuple("above" if A[2 * i, 2] < B[2 * i, 2] and A[2 * i + 1, 2] < B[2 * i + 1, 2]
                 else "below" for i in range(3))
    stroke = all(lo <= r <= hi for r, lo, hi in zip(rho, p.rho_min, p.rho_max))
    crossing_ok = p.R1 * math.cos(pose.alpha) > p.r1
    return AssemblyMode(legs, all(l == "above" for l in legs) and stroke and crossing_ok)


def _make_solution(pose, rho, p, source) -> FkSolution:
    eps_y, eps_z = guard_scales(rho, p)
    c, s = math.cos(pose.alpha), math.sin(pose.alpha)
    den_z = (rho[1] - rho[2]) * (p.R1 * c - p.r1) + 2.0 * s * (p.r4 * p.R1 - p.r1 * p.R2)
    return FkSolution(
        pose, classify_assembly_mode(pose, rho, p),
        normalized(closed_form_residuals(pose, rho, p), p),
        abs(p.R1 * c - p.r1) / eps_y, abs(den_z) / eps_z, source)


def fk_parallel(rho, p: MachineParams) -> list[FkSolution]:
    """Every assembly mode for the given slider positions, sorted by alpha then position."""
    rho = JointCoords(*(float(r) for r in rho))
    sols: list[FkSolution] = []

    def add(pose, source):
        for s in sols:
            if (abs(wrap_angle(s.pose.alpha - pose.alpha)) < _DEDUP_TOL
                    and max(abs(s.pose[i] - pose[i]) for i in range(3)) < _DEDUP_TOL * 1e3):
                return
        sols.append(_make_solution(pose, rho, p, source))

    for a in special_orientations(rho, p):
        for pose in solve_at_orientation(a, rho, p):
            add(pose, "special")
    for a in octic_orientations(rho, p):
        poses = []
        try:
            pose = fk_back_substitute(a, rho, p)
            if np.max(np.abs(normalized(closed_form_residuals(pose, rho, p), p))) < RESIDUAL_TOL:
                poses = [pose]
        except SingularDenominator:
            pass
        if not poses:
            poses = solve_at_orientation(a, rho, p)
        for pose in poses:
            add(pose, "octic")
    if not sols:
        raise NoAssembly(f"no real assembly mode for rho = {tuple(rho)}")
    return sorted(sols, key=lambda s: (s.pose.alpha, s.pose.x, s.pose.y, s.pose.z))


def fk_machine(rho, orient: TableOrientation, p: MachineParams) -> list[ToolPose]:
    """Tool poses in the table frame, one per assembly mode."""
    return [tool_pose_from_platform(s.pose, orient, p) for s in fk_parallel(rho, p)]
