"""Homogeneous transforms between the base frame, the tilting table and the platform.

Frames: ``R_b`` fixed base with z pointing down, ``R_pl`` on the moving
platform at P, ``R_t`` on the tilting table.  All transforms are plain
4x4 float64 arrays.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .params import MachineParams


class PlatformPose(NamedTuple):
    x: float
    y: float
    z: float
    alpha: float


class TableOrientation(NamedTuple):
    theta1: float
    theta2: float


class ToolPose(NamedTuple):
    X: float
    Y: float
    Z: float
    phi1: float
    phi2: float


def wrap_angle(a: float) -> float:
    """Map onto (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def trans(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    T = np.eye(4)
    T[:3, 3] = (x, y, z)
    return T


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    T = np.eye(4)
    T[1, 1], T[1, 2], T[2, 1], T[2, 2] = c, -s, s, c
    return T


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    T = np.eye(4)
    T[0, 0], T[0, 1], T[1, 0], T[1, 1] = c, -s, s, c
    return T


def invert(T: np.ndarray) -> np.ndarray:
    R = T[:3, :3]
    out = np.eye(4)
    out[:3, :3] = R.T
    out[:3, 3] = -R.T @ T[:3, 3]
    return out


def apply(T: np.ndarray, point) -> np.ndarray:
    pts = np.asarray(point, dtype=float)
    return pts @ T[:3, :3].T + T[:3, 3]


def x_rotation_angle(T: np.ndarray) -> float:
    """Angle of a pure x-rotation block.  Ill-conditioned only near pi."""
    return math.atan2(T[2, 1], T[1, 1])


def base_from_platform(pose: PlatformPose) -> np.ndarray:
    return trans(pose.x, pose.y, pose.z) @ rot_x(pose.alpha)


def base_from_table(orient: TableOrientation, p: MachineParams) -> np.ndarray:
    return (trans(z=p.d_a) @ rot_x(orient.theta1) @ trans(z=p.d_t)
            @ rot_x(math.pi) @ rot_z(orient.theta2))


def table_from_platform(tool: ToolPose, p: MachineParams) -> np.ndarray:
    return (trans(tool.X, tool.Y, tool.Z) @ rot_z(tool.phi2)
            @ rot_x(math.pi + tool.phi1) @ trans(z=-p.delta))


def tcp_in_base(pose: PlatformPose, delta: float) -> tuple[float, float, float]:
    return (pose.x, pose.y - delta * math.sin(pose.alpha), pose.z + delta * math.cos(pose.alpha))


def tool_pose_from_platform(pose: PlatformPose, orient: TableOrientation,
                            p: MachineParams) -> ToolPose:
    x, y, z, a = pose
    t1, t2 = orient
    c1, s1 = math.cos(t1), math.sin(t1)
    v1 = p.delta * math.sin(a - t1) - c1 * y - s1 * (z - p.d_a)
    v2 = p.d_t - c1 * z + p.d_a * c1 - p.delta * math.cos(a - t1)
    return ToolPose(
        math.cos(t2) * x + v1 * math.sin(t2),
        -math.sin(t2) * x + v1 * math.cos(t2),
        s1 * y + v2,
        wrap_angle(a - t1),
        wrap_angle(-t2),
    )


def tool_pose_via_chain(pose: PlatformPose, orient: TableOrientation,
                        p: MachineParams) -> ToolPose:
    """Same result as :func:`tool_pose_from_platform`, through the matrix chain."""
    T = invert(base_from_table(orient, p)) @ base_from_platform(pose)
    X, Y, Z = apply(T, (0.0, 0.0, p.delta))
    return ToolPose(X, Y, Z, wrap_angle(pose.alpha - orient.theta1), wrap_angle(-orient.theta2))


def platform_from_tool(tool: ToolPose, theta1: float, p: MachineParams) -> PlatformPose:
    """Platform pose reached when the table sits at ``theta1`` and ``theta2 = -phi2``."""
    T = base_from_table(TableOrientation(theta1, -tool.phi2), p) @ table_from_platform(tool, p)
    x, y, z = T[:3, 3]
    return PlatformPose(float(x), float(y), float(z), wrap_angle(theta1 + tool.phi1))


def platform_attachments(pose: PlatformPose, p: MachineParams) -> np.ndarray:
    """B_ij in R_b, rows ordered B11, B12, B21, B22, B31, B32."""
    local = np.array([
        [p.D1, p.R1, 0.0],
        [p.D1, -p.R1, 0.0],
        [p.D2 + p.w2, -p.R2, 0.0],
        [p.D2 - p.w2, -p.R2, 0.0],
        [p.D2 + p.w2, p.R2, 0.0],
        [p.D2 - p.w2, p.R2, 0.0],
    ])
    return apply(base_from_platform(pose), local)


def slider_attachments(rho, p: MachineParams) -> np.ndarray:
    """A_ij in R_b, same row order as :func:`platform_attachments`."""
    r1, r2, r3 = rho
    return np.array([
        [p.d1, p.r1, r1],
        [p.d1, -p.r1, r1],
        [p.d2 + p.w2, -p.r4, r2],
        [p.d2 - p.w2, -p.r4, r2],
        [p.d2 + p.w2, p.r4, r3],
        [p.d2 - p.w2, p.r4, r3],
    ], dtype=float)


ROD_LEG = (0, 0, 1, 1, 2, 2)
