"""Brute-force reference solvers for tests and debugging.

They scan the orientation densely instead of building polynomials, so they
share no root-finding code with :mod:`verne.ik` or :mod:`verne.fk`.  They
are slow and only meant as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .coupling import coupling_residual_scaled
from .errors import SingularDenominator
from .fk import fk_back_substitute, guard_scales
from .ik import _leg_roots
from .params import JointCoords, MachineParams
from .transforms import PlatformPose, wrap_angle

DEFAULT_N = 4096
MIN_N = 1000
_XTOL = 1e-14
_RTOL = 4.0 * np.finfo(float).eps
_TOUCH_TOL = 1e-12  # accepted |g| at a refined local minimum


def _grid(n: int) -> np.ndarray:
    if n < MIN_N:
        raise ValueError(f"oracle grid needs at least {MIN_N} points")
    # uniform over (-pi, pi]
    return -math.pi + 2.0 * math.pi * np.arange(1, n + 1) / n


def _chain_residual(alpha: np.ndarray, rho, p: MachineParams):
    """Rod 11 residual after the elimination chain; NaN inside guard bands."""
    p1, p2, p3 = rho
    c, s = np.cos(alpha), np.sin(alpha)
    eps_y, eps_z = guard_scales(rho, p)
    u, v = p.R1 * c - p.r1, p.R1 * s
    w, q = p.R2 * c - p.r4, p.R2 * s
    g = p3 - p2 - 2.0 * q
    b2 = p.L2**2 - p.L3**2 + g * (p2 + p3)
    den_z = (p2 - p3) * u + 2.0 * s * (p.r4 * p.R1 - p.r1 * p.R2)
    guard = (np.abs(u) < eps_y) | (np.abs(den_z) < eps_z)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (u * b2 + 4.0 * w * v * p1) / (-2.0 * den_z)
        y = -v * (z - p1) / u
        k = (p.e1**2 - p.e2**2 + u * u - w * w + (v - p1) ** 2 - (q + p2) ** 2
             - p.L1**2 + p.L2**2)
        x = -(2.0 * y * (u + w) + 2.0 * z * (v - p1 + q + p2) + k) / (2.0 * (p.e1 - p.e2))
        f = ((x + p.e1) ** 2 + (y + u) ** 2 + (z + v - p1) ** 2 - p.L1**2) / p.L1**2
    f = np.where(guard, np.nan, f)
    return f, guard


@dataclass
class OracleFk:
    poses: list[PlatformPose]
    guard_bands: list[tuple[float, float]] = field(default_factory=list)


def _bands(a: np.ndarray, mask: np.ndarray) -> list[tuple[float, float]]:
    out = []
    i, n = 0, len(a)
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            out.append((float(a[i]), float(a[j])))
            i = j + 1
        else:
            i += 1
    return out


def oracle_fk(rho, p: MachineParams, n: int = DEFAULT_N) -> OracleFk:
    """Zeros of the back-substituted rod 11 residual found by sign changes on a grid.

    A grid-local minimum of ``|f|`` whose neighbours share its sign is also
    refined, which catches a root pair closer than the grid step.  Grid
    points inside a denominator guard band are skipped and the bands are
    returned separately.
    """
    rho = JointCoords(*(float(r) for r in rho))
    a = _grid(n)
    f, guard = _chain_residual(a, rho, p)

    def fs(t):
        return float(_chain_residual(np.array([t]), rho, p)[0][0])

    roots: list[float] = []
    h = 2.0 * math.pi / n
    for i in range(n):
        fl, f0, fr = f[i - 1], f[i], f[(i + 1) % n]
        if not (np.isfinite(fl) and np.isfinite(f0) and np.isfinite(fr)):
            continue
        if f0 == 0.0 or not ((fl > 0) == (f0 > 0) == (fr > 0)):
            continue
        if abs(f0) > abs(fl) or abs(f0) > abs(fr):
            continue
        sg = 1.0 if f0 > 0 else -1.0
        lo, hi = a[i] - h, a[i] + h
        res = minimize_scalar(lambda t: sg * fs(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": _XTOL})
        m = float(res.x)
        fm = fs(m)
        if np.isfinite(fm) and fm * sg < 0:
            roots += [brentq(fs, lo, m, xtol=_XTOL, rtol=_RTOL),
                      brentq(fs, m, hi, xtol=_XTOL, rtol=_RTOL)]
    # wrap so the interval (a[-1], a[0] + 2 pi) is scanned too
    aa = np.append(a, a[0] + 2.0 * math.pi)
    ff = np.append(f, f[0])
    for i in range(n):
        f0, f1 = ff[i], ff[i + 1]
        if not (np.isfinite(f0) and np.isfinite(f1)):
            continue
        if f0 == 0.0:
            root = aa[i]
        elif (f0 > 0) == (f1 > 0):
            continue
        else:
            root = brentq(fs, aa[i], aa[i + 1], xtol=_XTOL, rtol=_RTOL)
        roots.append(float(root))
    poses = []
    for root in sorted(wrap_angle(r) for r in roots):
        try:
            poses.append(fk_back_substitute(root, rho, p))
        except SingularDenominator:
            continue
    return OracleFk(poses, _bands(a, guard))


def oracle_ik(x: float, y: float, z: float, p: MachineParams, n: int = DEFAULT_N):
    """``[(alpha, JointCoords, branch), ...]`` from a dense scan of the leg I relation.

    Sign changes are bisected.  Grid-local minima of ``|g|`` are also refined,
    which catches even-multiplicity zeros such as alpha = 0 at ``y = 0``.
    """
    a = _grid(n)
    g = coupling_residual_scaled(x, y, a, p)

    def gs(t):
        return float(coupling_residual_scaled(x, y, t, p))

    h = 2.0 * math.pi / n
    roots: list[float] = []
    for i in range(n):
        j = (i + 1) % n
        lo, hi = a[i], a[i] + h
        if g[i] == 0.0:
            roots.append(a[i])
        elif (g[i] > 0) != (g[j] > 0):
            roots.append(brentq(gs, lo, hi, xtol=_XTOL, rtol=_RTOL))
    absg = np.abs(g)
    for i in range(n):
        l, r = absg[(i - 1) % n], absg[(i + 1) % n]
        if absg[i] <= l and absg[i] <= r and (g[(i - 1) % n] > 0) == (g[(i + 1) % n] > 0):
            res = minimize_scalar(lambda t: abs(gs(t)), bounds=(a[i] - h, a[i] + h),
                                  method="bounded", options={"xatol": _XTOL})
            if abs(gs(res.x)) < _TOUCH_TOL:
                roots.append(float(res.x))
    roots = sorted(wrap_angle(r) for r in roots)
    uniq: list[float] = []
    for r in roots:
        if not uniq or abs(r - uniq[-1]) > 1e-7:
            uniq.append(r)
    if len(uniq) > 1 and abs(uniq[0] + math.pi - (uniq[-1] - math.pi)) < 1e-7:
        uniq.pop(0)
    out = []
    for al in uniq:
        leg1, leg2, leg3 = _leg_roots(PlatformPose(x, y, z, al), p)
        for r1, t1 in leg1:
            for r2, t2 in leg2:
                for r3, t3 in leg3:
                    out.append((al, JointCoords(r1, r2, r3), (t1, t2, t3)))
    return out
