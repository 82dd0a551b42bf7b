"""Workspace by discretisation.

Leg I confines the platform centre to an ellipse for each orientation and
height.  The sweep samples that ellipse over a lattice of orientations and
heights.  It then takes the physical IK branch of every sample and runs the
five constraint checks.  Accepted points are rasterised into voxels, either
in the base frame (platform centre or tool tip) or in the table frame.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .coupling import ellipse_samples, iso_orientation_ellipse
from .errors import EmptyLocus, InvalidValue
from .kernels import CODE_NAMES, OK
from .params import MachineParams
from .transforms import PlatformPose

DEFAULT_ALPHA_STEPS = 61
DEFAULT_Z_STEPS = 41
DEFAULT_RESOLUTION = 40
DEFAULT_CELL = 10.0  # mm

FRAME_BASE = "R_b"
FRAME_TABLE = "R_t"


@dataclass(frozen=True)
class ConstraintLimits:
    rod_clearance: float
    passive_cone_half_angle: float
    singularity_margin: float
    rho_min: tuple[float, float, float]
    rho_max: tuple[float, float, float]

    def __post_init__(self):
        for name in ("rod_clearance", "passive_cone_half_angle", "singularity_margin"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidValue(name, "must be positive")
        if not 0 < self.passive_cone_half_angle < math.pi / 2:
            raise InvalidValue("passive_cone_half_angle", "must lie in (0, pi/2)")
        if not self.singularity_margin < math.pi / 2:
            raise InvalidValue("singularity_margin", "must lie in (0, pi/2)")
        for lo, hi in zip(self.rho_min, self.rho_max):
            if not 0 < lo < hi:
                raise InvalidValue("rho_max", "needs 0 < rho_min < rho_max")

    @classmethod
    def from_params(cls, p: MachineParams, **overrides) -> "ConstraintLimits":
        vals = dict(rod_clearance=p.rod_clearance,
                    passive_cone_half_angle=p.passive_cone_half_angle,
                    singularity_margin=p.singularity_margin,
                    rho_min=tuple(p.rho_min), rho_max=tuple(p.rho_max))
        vals.update(overrides)
        return cls(**vals)

    def vector(self) -> np.ndarray:
        """Flat float64 vector for the kernels (layout in ``kernels.LIM_*``)."""
        return np.array([*self.rho_min, *self.rho_max, self.rod_clearance,
                         math.cos(self.passive_cone_half_angle),
                         math.sin(self.singularity_margin)], dtype=np.float64)


def check_constraints(pose: PlatformPose, rho, p: MachineParams, lim: ConstraintLimits) -> int:
    """Reason code (see ``kernels.CODE_NAMES``) of the first failing check, ``OK`` if none."""
    c, s = math.cos(pose.alpha), math.sin(pose.alpha)
    r1, r2, r3 = (float(r) for r in rho)
    if kernels.USE_NUMBA:
        return int(kernels.classify_one(float(pose.x), float(pose.y), float(pose.z), c, s,
                                        r1, r2, r3, p.geometry(), lim.vector()))
    arr = lambda v: np.array([float(v)])  # noqa: E731
    return int(kernels.classify_np(arr(pose.x), arr(pose.y), arr(pose.z), arr(c), arr(s),
                                   arr(r1), arr(r2), arr(r3), p.geometry(), lim.vector())[0])


def alpha_limit(p: MachineParams) -> float:
    """Largest |alpha| before the two leg I rods cross (``R1 cos(alpha) = r1``)."""
    return math.acos(p.r1 / p.R1) if p.r1 < p.R1 else 0.0


def alpha_grid(p: MachineParams, steps: int) -> np.ndarray:
    """Symmetric orientation grid over the crossing-free interval; exact mirror pairs."""
    if steps < 2:
        raise ValueError("alpha_steps must be >= 2")
    amax = alpha_limit(p)
    first = np.linspace(-amax, amax, steps)[: steps // 2]
    mid = [0.0] if steps % 2 else []
    return np.concatenate([first, mid, -first[::-1]])


def z_grid(p: MachineParams, steps: int) -> np.ndarray:
    if steps < 2:
        raise ValueError("z_steps must be >= 2")
    return np.linspace(min(p.rho_min), max(p.rho_max) + max(p.rod_lengths), steps)


def _locus_samples(alphas: np.ndarray, p: MachineParams, resolution: int):
    n = 2 * (resolution // 2)
    xs = np.full((alphas.size, n), np.nan)
    ys = np.full((alphas.size, n), np.nan)
    for i, a in enumerate(alphas):
        try:
            e = iso_orientation_ellipse(float(a), p)
        except EmptyLocus:
            continue
        xs[i], ys[i] = ellipse_samples(e, resolution)
    return xs, ys


@dataclass
class Sweep:
    """Every evaluated sample with its reason code; arrays have shape ``(n_alpha, n_z, n_t)``."""

    alphas: np.ndarray
    zs: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    alpha: np.ndarray
    rho: np.ndarray
    codes: np.ndarray

    @property
    def accepted(self) -> np.ndarray:
        return self.codes == OK

    def counts(self) -> dict[str, int]:
        binc = np.bincount(self.codes.ravel(), minlength=len(CODE_NAMES))
        return {name: int(binc[i]) for i, name in enumerate(CODE_NAMES)}

    def accepted_poses(self) -> np.ndarray:
        """(n, 4) array of ``x, y, z, alpha`` for accepted samples."""
        m = self.accepted
        return np.stack([self.x[m], self.y[m], self.z[m], self.alpha[m]], -1)


def sweep(p: MachineParams, lim: ConstraintLimits, alphas, zs, resolution: int,
          use_numba: bool | None = None) -> Sweep:
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    alphas = np.asarray(alphas, dtype=float)
    zs = np.asarray(zs, dtype=float)
    xs, ys = _locus_samples(alphas, p, resolution)
    cs, ss = np.cos(alphas), np.sin(alphas)
    codes, rho = kernels.sweep(xs, ys, zs, cs, ss, p.geometry(), lim.vector(), use_numba)
    shape = codes.shape
    X = np.broadcast_to(xs[:, None, :], shape)
    Y = np.broadcast_to(ys[:, None, :], shape)
    Z = np.broadcast_to(zs[None, :, None], shape)
    A = np.broadcast_to(alphas[:, None, None], shape)
    return Sweep(alphas, zs, X, Y, Z, A, rho, codes)


def constant_orientation_slice(alpha: float, z_p: float, p: MachineParams,
                               lim: ConstraintLimits, resolution: int) -> np.ndarray:
    """Accepted ``(x_p, y_p)`` points of the locus at one orientation and height, shape (n, 2)."""
    sw = sweep(p, lim, [alpha], [z_p], resolution)
    m = sw.accepted[0, 0]
    return np.stack([sw.x[0, 0][m], sw.y[0, 0][m]], -1)


@dataclass
class WorkspaceGrid:
    """Voxel raster of a sweep.

    Each voxel carries one code: ``ok`` when an accepted sample falls in it,
    otherwise the lowest rejection code among its samples, and
    ``coupling_empty`` when no locus sample reaches it at all.
    """

    frame: str
    origin: np.ndarray
    cell_size: float
    dims: tuple[int, int, int]
    cells: np.ndarray  # int8 codes, shape dims
    points: np.ndarray  # accepted points in this frame, (n, 3)
    point_alpha: np.ndarray
    sweep: Sweep

    @property
    def occupied(self) -> np.ndarray:
        return self.cells == OK

    @property
    def volume(self) -> float:
        return float(self.occupied.sum()) * self.cell_size**3

    def cell_counts(self) -> dict[str, int]:
        binc = np.bincount(self.cells.ravel(), minlength=len(CODE_NAMES))
        return {name: int(binc[i]) for i, name in enumerate(CODE_NAMES)}

    def summary(self) -> dict:
        return {
            "frame": self.frame,
            "cell_size": self.cell_size,
            "dims": list(self.dims),
            "occupied_cells": int(self.occupied.sum()),
            "volume_mm3": self.volume,
            "samples": int(self.sweep.codes.size),
            "accepted_samples": int(self.sweep.accepted.sum()),
            "sample_codes": self.sweep.counts(),
            "cell_codes": self.cell_counts(),
        }


def _rasterize(frame: str, pts_all: np.ndarray, sw: Sweep, cell: float) -> WorkspaceGrid:
    codes = sw.codes.ravel()
    finite = np.isfinite(pts_all).all(axis=1)
    acc = codes == OK
    if finite.any():
        lo = np.floor(pts_all[finite].min(axis=0) / cell) * cell
        hi = pts_all[finite].max(axis=0)
        dims = tuple(int(d) for d in np.floor((hi - lo) / cell).astype(int) + 1)
    else:
        lo, dims = np.zeros(3), (1, 1, 1)
    cells = np.full(dims, kernels.COUPLING_EMPTY, dtype=np.int8)
    idx = np.floor((pts_all[finite] - lo) / cell).astype(int)
    idx = np.minimum(idx, np.array(dims) - 1)
    flat = np.ravel_multi_index(idx.T, dims)
    best = np.full(int(np.prod(dims)), kernels.COUPLING_EMPTY, dtype=np.int8)
    np.minimum.at(best, flat, codes[finite])
    cells[...] = best.reshape(dims)
    return WorkspaceGrid(frame, lo, cell, dims, cells, pts_all[acc],
                         sw.alpha.ravel()[acc], sw)


def _check_steps(alpha_steps, z_steps, resolution):
    if min(alpha_steps, z_steps, resolution) < 2:
        raise ValueError("step counts must be >= 2")


def full_workspace(p: MachineParams, lim: ConstraintLimits, delta: float = 0.0,
                   alpha_steps: int = DEFAULT_ALPHA_STEPS, z_steps: int = DEFAULT_Z_STEPS,
                   resolution: int = DEFAULT_RESOLUTION, cell_size: float = DEFAULT_CELL,
                   use_numba: bool | None = None) -> WorkspaceGrid:
    """Base-frame workspace of the tool tip at distance ``delta`` below the platform centre."""
    _check_steps(alpha_steps, z_steps, resolution)
    sw = sweep(p, lim, alpha_grid(p, alpha_steps), z_grid(p, z_steps), resolution, use_numba)
    x, y, z, a = (v.ravel() for v in (sw.x, sw.y, sw.z, sw.alpha))
    if delta:
        pts = np.stack([x, y - delta * np.sin(a), z + delta * np.cos(a)], -1)
    else:
        pts = np.stack([x, y, z], -1)
    return _rasterize(FRAME_BASE, pts, sw, cell_size)


def tool_points_in_table(x, y, z, alpha, theta1, theta2, p: MachineParams, delta: float):
    """Vectorised tool tip position in the table frame."""
    c1, s1 = np.cos(theta1), np.sin(theta1)
    v1 = delta * np.sin(alpha - theta1) - c1 * y - s1 * (z - p.d_a)
    v2 = p.d_t - c1 * z + p.d_a * c1 - delta * np.cos(alpha - theta1)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    return np.stack([c2 * x + v1 * s2, -s2 * x + v1 * c2, s1 * y + v2], -1)


def manufacturing_workspace(p: MachineParams, lim: ConstraintLimits, delta: float,
                            phi1: float = 0.0, phi2: float = 0.0,
                            alpha_steps: int = DEFAULT_ALPHA_STEPS, z_steps: int = DEFAULT_Z_STEPS,
                            resolution: int = DEFAULT_RESOLUTION, cell_size: float = DEFAULT_CELL,
                            use_numba: bool | None = None) -> WorkspaceGrid:
    """Table-frame tool tip workspace at fixed tool orientation ``(phi1, phi2)``.

    The table follows the platform: ``theta1 = alpha - phi1`` and
    ``theta2 = -phi2``.  The table stroke is not applied, so this grid is
    empty exactly when :func:`full_workspace` is.
    """
    _check_steps(alpha_steps, z_steps, resolution)
    sw = sweep(p, lim, alpha_grid(p, alpha_steps), z_grid(p, z_steps), resolution, use_numba)
    x, y, z, a = (v.ravel() for v in (sw.x, sw.y, sw.z, sw.alpha))
    pts = tool_points_in_table(x, y, z, a, a - phi1, -phi2, p, delta)
    return _rasterize(FRAME_TABLE, pts, sw, cell_size)


def convergence(p: MachineParams, lim: ConstraintLimits, delta: float = 0.0,
                alpha_steps: int = DEFAULT_ALPHA_STEPS, z_steps: int = DEFAULT_Z_STEPS,
                resolution: int = DEFAULT_RESOLUTION, cell_size: float = DEFAULT_CELL) -> dict:
    """Volume at ``resolution`` and at twice that, with the relative change."""
    v1 = full_workspace(p, lim, delta, alpha_steps, z_steps, resolution, cell_size).volume
    v2 = full_workspace(p, lim, delta, alpha_steps, z_steps, 2 * resolution, cell_size).volume
    rel = abs(v2 - v1) / v2 if v2 else 0.0
    return {"volume": v1, "volume_doubled": v2, "relative_change": rel}


# export

POINT_COLUMNS = ("frame", "x", "y", "z", "alpha")


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def write_points_csv(grid: WorkspaceGrid, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POINT_COLUMNS)
        for (x, y, z), a in zip(grid.points, grid.point_alpha):
            w.writerow((grid.frame, _fmt(x), _fmt(y), _fmt(z), _fmt(a)))


def write_slices(grid: WorkspaceGrid, directory) -> list[Path]:
    """One CSV per sweep height with the accepted platform samples at that height."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sw = grid.sweep
    out = []
    for k, zval in enumerate(sw.zs):
        m = sw.accepted[:, k, :]
        path = directory / f"slice_{k:03d}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("z", "x", "y", "alpha"))
            for x, y, a in zip(sw.x[:, k, :][m], sw.y[:, k, :][m], sw.alpha[:, k, :][m]):
                w.writerow((_fmt(zval), _fmt(x), _fmt(y), _fmt(a)))
        out.append(path)
    return out


def format_summary(grid: WorkspaceGrid) -> str:
    s = grid.summary()
    lines = [f"frame = {s['frame']}",
             f"cell_size = {_fmt(s['cell_size'])}",
             f"dims = {' '.join(str(d) for d in s['dims'])}",
             f"occupied_cells = {s['occupied_cells']}",
             f"volume_mm3 = {_fmt(s['volume_mm3'])}",
             f"samples = {s['samples']}",
             f"accepted_samples = {s['accepted_samples']}"]
    lines += [f"samples_{k} = {v}" for k, v in s["sample_codes"].items()]
    lines += [f"cells_{k} = {v}" for k, v in s["cell_codes"].items()]
    return "\n".join(lines) + "\n"
