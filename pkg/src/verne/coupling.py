"""Position/orientation coupling imposed by leg I.

Eliminating the leg I slider coordinate from its two rod equations leaves a
relation between ``x_p``, ``y_p`` and ``alpha`` alone: for each orientation
the platform centre is confined to an ellipse in the xy-plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyLocus
from .params import MachineParams

# radicand of the semi-axis treated as exactly zero below this fraction of L1^2
_POINT_LOCUS_RTOL = 1e-12
_SIN_ZERO = 1e-15


def _k(alpha, p: MachineParams):
    """Squared yz-distance ``R1^2 + r1^2 - 2 R1 r1 cos(alpha)``."""
    return p.R1**2 + p.r1**2 - 2.0 * p.R1 * p.r1 * np.cos(alpha)


def coupling_residual(x, y, alpha, p: MachineParams):
    """Raw leg I coupling residual in mm^4; works on scalars or arrays."""
    s2 = np.sin(alpha) ** 2
    k = _k(alpha, p)
    R1sq = p.R1**2
    return R1sq * s2 * (x + p.e1) ** 2 + k * y**2 - R1sq * s2 * (p.L1**2 - k)


def coupling_residual_scaled(x, y, alpha, p: MachineParams):
    """Dimensionless residual, divided by ``R1^2 L1^2``."""
    return coupling_residual(x, y, alpha, p) / (p.R1**2 * p.L1**2)


@dataclass(frozen=True)
class IsoOrientationEllipse:
    alpha: float
    center_x: float
    a: float  # semi-axis along x
    b: float  # semi-axis along y

    @property
    def major_axis(self) -> str:
        return "x" if self.a >= self.b else "y"

    @property
    def is_point(self) -> bool:
        return self.a == 0.0


def iso_orientation_ellipse(alpha: float, p: MachineParams) -> IsoOrientationEllipse:
    k = float(_k(alpha, p))
    rad = p.L1**2 - k
    if rad < -_POINT_LOCUS_RTOL * p.L1**2:
        raise EmptyLocus(alpha)
    if rad <= _POINT_LOCUS_RTOL * p.L1**2:
        return IsoOrientationEllipse(alpha, -p.e1, 0.0, 0.0)
    s = math.sin(alpha)
    if abs(s) < _SIN_ZERO:  # alpha is the float nearest a multiple of pi
        s = 0.0
    a = math.sqrt(rad)
    b = math.sqrt(p.R1**2 * s * s * rad / k)
    return IsoOrientationEllipse(alpha, -p.e1, a, b)


def ellipse_point(e: IsoOrientationEllipse, t):
    return e.center_x + e.a * np.cos(t), e.b * np.sin(t)


def ellipse_samples(e: IsoOrientationEllipse, n: int) -> tuple[np.ndarray, np.ndarray]:
    """About ``n`` points (``n`` rounded down to even) spread over the ellipse.

    The upper half is computed once and reflected, so the sample set is
    mirror-symmetric across ``y = 0`` bit for bit.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    half = n // 2 + 1
    t = np.linspace(0.0, math.pi, half)
    x_half = e.center_x + e.a * np.cos(t)
    y_half = e.b * np.sin(t)
    y_half[0] = 0.0
    y_half[-1] = 0.0
    # interior points get a mirrored twin
    xs = np.concatenate([x_half, x_half[1:-1][::-1]])
    ys = np.concatenate([y_half, -y_half[1:-1][::-1]])
    return xs, ys
