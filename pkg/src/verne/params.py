"""Machine parameter set: dataclass, validation and the ``key = value unit`` file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import InvalidValue, MissingField, ParseError

_LENGTHS = (
    "D1", "d1", "R1", "r1", "D2", "d2", "R2", "r4", "w2",
    "L1", "L2", "L3", "delta", "d_a", "d_t",
)
_PER_SLIDER = ("rho_min", "rho_max")
_ANGLES = ("theta1_range", "passive_cone_half_angle", "singularity_margin")
_UNITS = {**{k: "mm" for k in _LENGTHS + _PER_SLIDER + ("rod_clearance",)},
          **{k: "rad" for k in _ANGLES}}


class JointCoords(NamedTuple):
    """Slider positions along the vertical guideways (mm, z down)."""

    rho1: float
    rho2: float
    rho3: float


@dataclass(frozen=True)
class MachineParams:
    """Geometric constants of the parallel module and tilting table (mm / rad).

    Leg I joins slider attachments ``(d1, ±r1, rho1)`` to platform points
    ``(D1, ±R1, 0)``; legs II and III join ``(d2 ± w2, ∓r4, rho_i)`` to
    ``(D2 ± w2, ∓R2, 0)``.  ``w2`` is the half-spacing of the parallelogram
    rods along x.  Strokes are per slider.
    """

    D1: float
    d1: float
    R1: float
    r1: float
    D2: float
    d2: float
    R2: float
    r4: float
    w2: float
    L1: float
    L2: float
    L3: float
    delta: float
    d_a: float
    d_t: float
    rho_min: tuple[float, float, float]
    rho_max: tuple[float, float, float]
    theta1_range: tuple[float, float]
    passive_cone_half_angle: float
    singularity_margin: float
    rod_clearance: float

    def __post_init__(self):
        validate(self)

    @property
    def e1(self) -> float:
        """x-offset ``D1 - d1`` of leg I; the rod equations only depend on this difference."""
        return self.D1 - self.d1

    @property
    def e2(self) -> float:
        return self.D2 - self.d2

    @property
    def rod_lengths(self) -> tuple[float, float, float]:
        return (self.L1, self.L2, self.L3)

    def geometry(self) -> np.ndarray:
        """Flat float64 vector consumed by the compiled kernels (layout in ``kernels.G_*``)."""
        return np.array([
            self.D1, self.d1, self.R1, self.r1, self.D2, self.d2, self.R2, self.r4, self.w2,
            self.L1, self.L2, self.L3,
        ], dtype=np.float64)

    def replace(self, **changes) -> "MachineParams":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(changes)
        return MachineParams(**vals)


def validate(p: MachineParams) -> None:
    for name in _LENGTHS:
        v = getattr(p, name)
        if not (math.isfinite(v) and v > 0):
            raise InvalidValue(name, "must be a finite positive length")
    for name in _PER_SLIDER:
        v = getattr(p, name)
        if len(v) != 3 or not all(math.isfinite(x) and x > 0 for x in v):
            raise InvalidValue(name, "needs three finite positive lengths")
    for i, (lo, hi) in enumerate(zip(p.rho_min, p.rho_max)):
        if not lo < hi:
            raise InvalidValue("rho_max", f"slider {i + 1}: rho_min must be below rho_max")
    if p.R1 == p.r1:
        raise InvalidValue("R1", "leg I must be asymmetric")
    if p.L1 ** 2 - (p.R1 - p.r1) ** 2 <= 0:
        raise InvalidValue("L1", "coupling ellipse is empty at alpha = 0")
    if p.e1 == p.e2:
        raise InvalidValue("D2", "D1 - d1 must differ from D2 - d2")
    lo, hi = p.theta1_range
    if not (len(p.theta1_range) == 2 and lo < hi):
        raise InvalidValue("theta1_range", "needs lower < upper")
    if not 0 < p.passive_cone_half_angle < math.pi / 2:
        raise InvalidValue("passive_cone_half_angle", "must lie in (0, pi/2)")
    if not 0 <= p.singularity_margin < math.pi / 2:
        raise InvalidValue("singularity_margin", "must lie in [0, pi/2)")
    if not (math.isfinite(p.rod_clearance) and p.rod_clearance >= 0):
        raise InvalidValue("rod_clearance", "must be >= 0")


def _parse_value(key: str, raw: str, lineno: int):
    unit = _UNITS[key]
    body = raw.strip()
    if not body.endswith(unit):
        raise ParseError(f"line {lineno}: {key} must carry unit '{unit}'")
    body = body[: -len(unit)].strip()
    try:
        nums = tuple(float(tok) for tok in body.split(","))
    except ValueError as exc:
        raise ParseError(f"line {lineno}: bad number for {key}: {body!r}") from exc
    if key in _PER_SLIDER:
        if len(nums) == 1:
            nums = nums * 3
        if len(nums) != 3:
            raise ParseError(f"line {lineno}: {key} takes 1 or 3 values")
        return nums
    if key == "theta1_range":
        if len(nums) != 2:
            raise ParseError(f"line {lineno}: theta1_range takes 2 values")
        return nums
    if len(nums) != 1:
        raise ParseError(f"line {lineno}: {key} takes a single value")
    return nums[0]


def parse_params(text: str) -> MachineParams:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value unit'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _UNITS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw, lineno)
    for f in fields(MachineParams):
        if f.name not in values:
            raise MissingField(f.name)
    return MachineParams(**values)


def load_params(source) -> MachineParams:
    """Load from a path, an open text stream or a string holding the file body."""
    if hasattr(source, "read"):
        return parse_params(source.read())
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        return parse_params(Path(source).read_text(encoding="utf-8"))
    return parse_params(str(source))


def dump_params(p: MachineParams) -> str:
    out = []
    for f in fields(p):
        v = getattr(p, f.name)
        body = ", ".join(repr(float(x)) for x in v) if isinstance(v, tuple) else repr(float(v))
        out.append(f"{f.name} = {body} {_UNITS[f.name]}")
    return "\n".join(out) + "\n"


def reference_params() -> MachineParams:
    """The frozen in-repo reference machine (``data/reference.cfg``)."""
    text = resources.files("verne").joinpath("data/reference.cfg").read_text(encoding="utf-8")
    return parse_params(text)
