"""Hot loops of the workspace sweep.

Each kernel exists twice: a scalar loop compiled with numba and a
vectorised numpy twin used when ``VERNE_NO_NUMBA=1``.  Both only use
``+ - * /`` and ``sqrt``.  The trigonometric values are computed once by
the caller, so the two paths produce identical codes.

The arithmetic is written so that the mirror image ``(x, -y, z, -alpha)``
of a pose produces bit-identical intermediate values with legs II and III
swapped.  Mirror symmetry of the workspace is therefore exact.
"""

from __future__ import annotations

import numpy as np

from ._jit import USE_NUMBA, maybe_njit

# geometry vector layout (MachineParams.geometry)
G_D1, G_d1, G_R1, G_r1, G_D2, G_d2, G_R2, G_r4, G_w2, G_L1, G_L2, G_L3 = range(12)
# limits vector layout (ConstraintLimits.vector)
LIM_RHO_MIN, LIM_RHO_MAX = 0, 3
LIM_CLEARANCE, LIM_COS_CONE, LIM_SIN_MARGIN = 6, 7, 8

OK, INTERFERENCE, LEG_LENGTH, SERIAL_SINGULARITY, PASSIVE_JOINT, STROKE, COUPLING_EMPTY = range(7)
CODE_NAMES = ("ok", "interference", "leg_length", "serial_singularity",
              "passive_joint", "stroke", "coupling_empty")

LENGTH_RTOL = 1e-9  # accepted |(|B - A|^2 - L^2)| / L^2
_PARALLEL_RTOL = 1e-12


@maybe_njit
def _clamp01(t):
    if t < 0.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return t


@maybe_njit
def _seg_dist_one(px, py, pz, ux, uy, uz, qx, qy, qz, vx, vy, vz):
    """Closest distance between segments ``p + s u`` and ``q + t v`` (s, t in [0, 1])."""
    rx, ry, rz = px - qx, py - qy, pz - qz
    a = ux * ux + uy * uy + uz * uz
    e = vx * vx + vy * vy + vz * vz
    f = vx * rx + vy * ry + vz * rz
    c = ux * rx + uy * ry + uz * rz
    b = ux * vx + uy * vy + uz * vz
    den = a * e - b * b
    s = 0.0
    if den > _PARALLEL_RTOL * a * e:
        s = _clamp01((b * f - c * e) / den)
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = _clamp01(-c / a)
    elif t > 1.0:
        t = 1.0
        s = _clamp01((b - c) / a)
    dx = rx + ux * s - vx * t
    dy = ry + uy * s - vy * t
    dz = rz + uz * s - vz * t
    return np.sqrt(dx * dx + dy * dy + dz * dz)


@maybe_njit
def segment_distance(p0, p1, q0, q1):
    """Minimum distance between segments ``p0p1`` and ``q0q1``, symmetric in argument order."""
    u = p1 - p0
    v = q1 - q0
    d1 = _seg_dist_one(p0[0], p0[1], p0[2], u[0], u[1], u[2],
                       q0[0], q0[1], q0[2], v[0], v[1], v[2])
    d2 = _seg_dist_one(q0[0], q0[1], q0[2], v[0], v[1], v[2],
                       p0[0], p0[1], p0[2], u[0], u[1], u[2])
    return min(d1, d2)


@maybe_njit
def _rods(x, y, z, c, s, r1, r2, r3, G):
    """Slider points A (6, 3) and platform points B (6, 3)."""
    A = np.empty((6, 3))
    B = np.empty((6, 3))
    R1c, R1s = G[G_R1] * c, G[G_R1] * s
    R2c, R2s = G[G_R2] * c, G[G_R2] * s
    xb1 = x + G[G_D1]
    xp, xm = x + (G[G_D2] + G[G_w2]), x + (G[G_D2] - G[G_w2])
    ap, am = G[G_d2] + G[G_w2], G[G_d2] - G[G_w2]
    A[0, 0], A[0, 1], A[0, 2] = G[G_d1], G[G_r1], r1
    A[1, 0], A[1, 1], A[1, 2] = G[G_d1], -G[G_r1], r1
    A[2, 0], A[2, 1], A[2, 2] = ap, -G[G_r4], r2
    A[3, 0], A[3, 1], A[3, 2] = am, -G[G_r4], r2
    A[4, 0], A[4, 1], A[4, 2] = ap, G[G_r4], r3
    A[5, 0], A[5, 1], A[5, 2] = am, G[G_r4], r3
    B[0, 0], B[0, 1], B[0, 2] = xb1, y + R1c, z + R1s
    B[1, 0], B[1, 1], B[1, 2] = xb1, y - R1c, z - R1s
    B[2, 0], B[2, 1], B[2, 2] = xp, y - R2c, z - R2s
    B[3, 0], B[3, 1], B[3, 2] = xm, y - R2c, z - R2s
    B[4, 0], B[4, 1], B[4, 2] = xp, y + R2c, z + R2s
    B[5, 0], B[5, 1], B[5, 2] = xm, y + R2c, z + R2s
    return A, B


@maybe_njit
def classify_one(x, y, z, c, s, r1, r2, r3, G, LIM):
    """Reason code of one pose with given slider positions; checks run in code order."""
    if G[G_R1] * c <= G[G_r1]:
        return INTERFERENCE
    A, B = _rods(x, y, z, c, s, r1, r2, r3, G)
    clearance = LIM[LIM_CLEARANCE]
    for i in range(6):
        for j in range(i + 1, 6):
            if segment_distance(A[i], B[i], A[j], B[j]) < clearance:
                return INTERFERENCE
    L = np.empty(6)
    for i in range(6):
        Li = G[G_L1 + i // 2]
        dx, dy, dz = B[i, 0] - A[i, 0], B[i, 1] - A[i, 1], B[i, 2] - A[i, 2]
        sq = dx * dx + dy * dy + dz * dz
        if abs(sq - Li * Li) > LENGTH_RTOL * Li * Li:
            return LEG_LENGTH
        L[i] = np.sqrt(sq)
    for i in range(6):
        if (B[i, 2] - A[i, 2]) < LIM[LIM_SIN_MARGIN] * L[i]:
            return SERIAL_SINGULARITY
    cos_cone = LIM[LIM_COS_CONE]
    for i in range(6):
        dy, dz = B[i, 1] - A[i, 1], B[i, 2] - A[i, 2]
        # A side: rod against base +z
        if dz < cos_cone * L[i]:
            return PASSIVE_JOINT
        # B side: rod back to the slider against the platform normal (0, s, -c)
        if dz * c - dy * s < cos_cone * L[i]:
            return PASSIVE_JOINT
    rho = (r1, r2, r3)
    for k in range(3):
        if rho[k] < LIM[LIM_RHO_MIN + k] or rho[k] > LIM[LIM_RHO_MAX + k]:
            return STROKE
    return OK


@maybe_njit
def upper_branch_one(x, y, z, c, s, G):
    """Slider positions of the physical branch; NaN marks an empty leg."""
    u = G[G_R1] * c - G[G_r1]
    v = G[G_R1] * s
    w = G[G_R2] * c - G[G_r4]
    q = G[G_R2] * s
    X1 = x + (G[G_D1] - G[G_d1])
    X2 = x + (G[G_D2] - G[G_d2])
    L1, L2, L3 = G[G_L1], G[G_L2], G[G_L3]
    if v != 0.0:
        # the two leg I rods share a slider: their difference is linear in rho1
        r1 = z + y * u / v
    else:
        rad1 = L1 * L1 - X1 * X1 - (y + u) * (y + u)
        r1 = z - np.sqrt(rad1) if rad1 >= 0.0 else np.nan
    rad2 = L2 * L2 - X2 * X2 - (y - w) * (y - w)
    rad3 = L3 * L3 - X2 * X2 - (y + w) * (y + w)
    r2 = z - q - np.sqrt(rad2) if rad2 >= 0.0 else np.nan
    r3 = z + q - np.sqrt(rad3) if rad3 >= 0.0 else np.nan
    return r1, r2, r3


@maybe_njit
def _sweep_numba(xs, ys, zs, cs, ss, G, LIM):
    na, nt = xs.shape
    nz = zs.shape[0]
    codes = np.empty((na, nz, nt), dtype=np.int8)
    rho = np.empty((na, nz, nt, 3))
    for i in range(na):
        for k in range(nz):
            for j in range(nt):
                x = xs[i, j]
                if np.isnan(x):
                    codes[i, k, j] = COUPLING_EMPTY
                    rho[i, k, j, 0] = rho[i, k, j, 1] = rho[i, k, j, 2] = np.nan
                    continue
                r1, r2, r3 = upper_branch_one(x, ys[i, j], zs[k], cs[i], ss[i], G)
                rho[i, k, j, 0], rho[i, k, j, 1], rho[i, k, j, 2] = r1, r2, r3
                if np.isnan(r1) or np.isnan(r2) or np.isnan(r3):
                    codes[i, k, j] = LEG_LENGTH
                else:
                    codes[i, k, j] = classify_one(x, ys[i, j], zs[k], cs[i], ss[i],
                                                  r1, r2, r3, G, LIM)
    return codes, rho


# numpy twin


def _dot(a, b):
    # same summation order as the scalar kernel
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _seg_dist_np(p, u, q, v):
    r = p - q
    a, e, f, c, b = _dot(u, u), _dot(v, v), _dot(v, r), _dot(u, r), _dot(u, v)
    den = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(den > _PARALLEL_RTOL * a * e, np.clip((b * f - c * e) / den, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        lo, hi = t < 0.0, t > 1.0
        s = np.where(lo, np.clip(-c / a, 0.0, 1.0), np.where(hi, np.clip((b - c) / a, 0.0, 1.0), s))
    t = np.where(lo, 0.0, np.where(hi, 1.0, t))
    d = r + u * s[..., None] - v * t[..., None]
    return np.sqrt(_dot(d, d))


def segment_distance_np(p0, p1, q0, q1):
    """Vectorised :func:`segment_distance` over leading axes."""
    u, v = p1 - p0, q1 - q0
    return np.minimum(_seg_dist_np(p0, u, q0, v), _seg_dist_np(q0, v, p0, u))


def upper_branch_np(x, y, z, c, s, G):
    u = G[G_R1] * c - G[G_r1]
    v = G[G_R1] * s
    w = G[G_R2] * c - G[G_r4]
    q = G[G_R2] * s
    X1 = x + (G[G_D1] - G[G_d1])
    X2 = x + (G[G_D2] - G[G_d2])
    L1, L2, L3 = G[G_L1], G[G_L2], G[G_L3]
    with np.errstate(divide="ignore", invalid="ignore"):
        rad1 = L1 * L1 - X1 * X1 - (y + u) * (y + u)
        r1 = np.where(v != 0.0, z + y * u / v,
                      np.where(rad1 >= 0.0, z - np.sqrt(rad1), np.nan))
        rad2 = L2 * L2 - X2 * X2 - (y - w) * (y - w)
        rad3 = L3 * L3 - X2 * X2 - (y + w) * (y + w)
        r2 = np.where(rad2 >= 0.0, z - q - np.sqrt(rad2), np.nan)
        r3 = np.where(rad3 >= 0.0, z + q - np.sqrt(rad3), np.nan)
    return r1, r2, r3


def classify_np(x, y, z, c, s, r1, r2, r3, G, LIM):
    """Vectorised :func:`classify_one`; every argument before ``G`` is a 1-d array."""
    n = x.shape[0]
    R1c, R1s = G[G_R1] * c, G[G_R1] * s
    R2c, R2s = G[G_R2] * c, G[G_R2] * s
    xb1 = x + G[G_D1]
    xp, xm = x + (G[G_D2] + G[G_w2]), x + (G[G_D2] - G[G_w2])
    ap, am = G[G_d2] + G[G_w2], G[G_d2] - G[G_w2]
    one = np.ones(n)
    A = np.stack([
        np.stack([G[G_d1] * one, G[G_r1] * one, r1], -1),
        np.stack([G[G_d1] * one, -G[G_r1] * one, r1], -1),
        np.stack([ap * one, -G[G_r4] * one, r2], -1),
        np.stack([am * one, -G[G_r4] * one, r2], -1),
        np.stack([ap * one, G[G_r4] * one, r3], -1),
        np.stack([am * one, G[G_r4] * one, r3], -1),
    ], 1)
    B = np.stack([
        np.stack([xb1, y + R1c, z + R1s], -1),
        np.stack([xb1, y - R1c, z - R1s], -1),
        np.stack([xp, y - R2c, z - R2s], -1),
        np.stack([xm, y - R2c, z - R2s], -1),
        np.stack([xp, y + R2c, z + R2s], -1),
        np.stack([xm, y + R2c, z + R2s], -1),
    ], 1)
    d = B - A
    codes = np.full(n, OK, dtype=np.int8)
    undecided = np.ones(n, dtype=bool)

    def mark(mask, code):
        hit = undecided & mask
        codes[hit] = code
        undecided[hit] = False

    mark(R1c <= G[G_r1], INTERFERENCE)
    dmin = np.full(n, np.inf)
    for i in range(6):
        for j in range(i + 1, 6):
            dmin = np.minimum(dmin, segment_distance_np(A[:, i], B[:, i], A[:, j], B[:, j]))
    mark(dmin < LIM[LIM_CLEARANCE], INTERFERENCE)
    Ls = np.array([G[G_L1], G[G_L1], G[G_L2], G[G_L2], G[G_L3], G[G_L3]])
    sq = d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2]
    mark((np.abs(sq - Ls * Ls) > LENGTH_RTOL * Ls * Ls).any(axis=1), LEG_LENGTH)
    L = np.sqrt(sq)
    dy, dz = d[..., 1], d[..., 2]
    mark((dz < LIM[LIM_SIN_MARGIN] * L).any(axis=1), SERIAL_SINGULARITY)
    cos_cone = LIM[LIM_COS_CONE]
    side_b = dz * c[:, None] - dy * s[:, None]
    mark(((dz < cos_cone * L) | (side_b < cos_cone * L)).any(axis=1), PASSIVE_JOINT)
    rho = np.stack([r1, r2, r3], -1)
    lo = np.asarray(LIM[LIM_RHO_MIN:LIM_RHO_MIN + 3])
    hi = np.asarray(LIM[LIM_RHO_MAX:LIM_RHO_MAX + 3])
    mark(((rho < lo) | (rho > hi)).any(axis=1), STROKE)
    return codes


def _sweep_numpy(xs, ys, zs, cs, ss, G, LIM):
    na, nt = xs.shape
    nz = zs.shape[0]
    X = np.broadcast_to(xs[:, None, :], (na, nz, nt)).ravel()
    Y = np.broadcast_to(ys[:, None, :], (na, nz, nt)).ravel()
    Z = np.broadcast_to(zs[None, :, None], (na, nz, nt)).ravel()
    C = np.broadcast_to(cs[:, None, None], (na, nz, nt)).ravel()
    S = np.broadcast_to(ss[:, None, None], (na, nz, nt)).ravel()
    r1, r2, r3 = upper_branch_np(X, Y, Z, C, S, G)
    codes = np.full(X.shape, COUPLING_EMPTY, dtype=np.int8)
    has_locus = ~np.isnan(X)
    legs_ok = has_locus & ~(np.isnan(r1) | np.isnan(r2) | np.isnan(r3))
    codes[has_locus & ~legs_ok] = LEG_LENGTH
    idx = np.flatnonzero(legs_ok)
    if idx.size:
        codes[idx] = classify_np(X[idx], Y[idx], Z[idx], C[idx], S[idx],
                                 r1[idx], r2[idx], r3[idx], G, LIM)
    rho = np.stack([r1, r2, r3], -1)
    rho[~has_locus] = np.nan
    return codes.reshape(na, nz, nt), rho.reshape(na, nz, nt, 3)


def sweep(xs, ys, zs, cs, ss, G, LIM, use_numba: bool | None = None):
    """Codes ``(na, nz, nt)`` and slider positions ``(na, nz, nt, 3)`` over the sample lattice.

    ``xs``/``ys`` hold the locus samples per orientation (NaN rows for an
    empty locus), ``cs``/``ss`` the orientation cosines and sines.
    """
    args = (np.ascontiguousarray(xs, dtype=np.float64), np.ascontiguousarray(ys, dtype=np.float64),
            np.ascontiguousarray(zs, dtype=np.float64), np.ascontiguousarray(cs, dtype=np.float64),
            np.ascontiguousarray(ss, dtype=np.float64), np.ascontiguousarray(G, dtype=np.float64),
            np.ascontiguousarray(LIM, dtype=np.float64))
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and USE_NUMBA:
        return _sweep_numba(*args)
    return _sweep_numpy(*args)
