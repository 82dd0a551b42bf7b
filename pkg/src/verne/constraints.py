"""Rod-length constraint equations of the parallel module.

Two evaluation routes are kept on purpose: the closed forms written in
platform coordinates, and the generic ``|B - A|^2 - L^2`` over the
transformed attachment points.  Tests check one against the other.
"""

from __future__ import annotations

import math

import numpy as np

from .params import MachineParams
from .transforms import ROD_LEG, PlatformPose, platform_attachments, slider_attachments


def closed_form_residuals(pose: PlatformPose, rho, p: MachineParams) -> np.ndarray:
    """Raw residuals (mm^2) of the leg I rod 1, leg I rod 2, leg II and leg III equations."""
    x, y, z, a = pose
    c, s = math.cos(a), math.sin(a)
    r1, r2, r3 = rho
    X1 = x + p.D1 - p.d1
    X2 = x + p.D2 - p.d2
    return np.array([
        X1**2 + (y + p.R1 * c - p.r1) ** 2 + (z + p.R1 * s - r1) ** 2 - p.L1**2,
        X1**2 + (y - p.R1 * c + p.r1) ** 2 + (z - p.R1 * s - r1) ** 2 - p.L1**2,
        X2**2 + (y - p.R2 * c + p.r4) ** 2 + (z - p.R2 * s - r2) ** 2 - p.L2**2,
        X2**2 + (y + p.R2 * c - p.r4) ** 2 + (z + p.R2 * s - r3) ** 2 - p.L3**2,
    ])


def closed_form_residuals_batch(poses: np.ndarray, rho: np.ndarray, p: MachineParams) -> np.ndarray:
    """Vectorised :func:`closed_form_residuals`; ``poses`` is (n, 4), ``rho`` is (n, 3)."""
    x, y, z, a = poses.T
    c, s = np.cos(a), np.sin(a)
    X1 = x + p.D1 - p.d1
    X2 = x + p.D2 - p.d2
    return np.stack([
        X1**2 + (y + p.R1 * c - p.r1) ** 2 + (z + p.R1 * s - rho[:, 0]) ** 2 - p.L1**2,
        X1**2 + (y - p.R1 * c + p.r1) ** 2 + (z - p.R1 * s - rho[:, 0]) ** 2 - p.L1**2,
        X2**2 + (y - p.R2 * c + p.r4) ** 2 + (z - p.R2 * s - rho[:, 1]) ** 2 - p.L2**2,
        X2**2 + (y + p.R2 * c - p.r4) ** 2 + (z + p.R2 * s - rho[:, 2]) ** 2 - p.L3**2,
    ], axis=1)


def rod_residuals(pose: PlatformPose, rho, p: MachineParams) -> np.ndarray:
    """``|B_ij - A_ij|^2 - L_i^2`` for all six rods, from the transformed points."""
    d = platform_attachments(pose, p) - slider_attachments(rho, p)
    L = np.array([p.rod_lengths[i] for i in ROD_LEG])
    return np.einsum("ij,ij->i", d, d) - L**2


def normalized(residuals: np.ndarray, p: MachineParams) -> np.ndarray:
    """Divide the four closed-form residuals by the matching ``L_i^2``."""
    L = np.array([p.L1, p.L1, p.L2, p.L3])
    return np.asarray(residuals) / L**2
