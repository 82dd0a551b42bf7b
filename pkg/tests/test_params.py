import math

import numpy as np
import pytest

from verne.errors import InvalidValue, MissingField, ParseError
from verne.params import dump_params, load_params, parse_params, reference_params


def test_reference_is_valid_and_asymmetric(p):
    assert p.R1 != p.r1
    assert p.L1**2 - (p.R1 - p.r1) ** 2 > 0


def test_reference_strokes_cover_demo_joint_values(p):
    for v in (674.0, 685.0, 250.0):
        assert all(lo <= v <= hi for lo, hi in zip(p.rho_min, p.rho_max))


def test_round_trip(p):
    assert parse_params(dump_params(p)) == p


def test_load_from_path_and_stream(tmp_path, p):
    f = tmp_path / "m.cfg"
    f.write_text(dump_params(p))
    assert load_params(f) == p
    assert load_params(str(f)) == p
    with open(f) as fh:
        assert load_params(fh) == p


def test_r1_equal_rejected(p):
    text = dump_params(p).replace(f"R1 = {p.R1!r} mm", f"R1 = {p.r1!r} mm")
    with pytest.raises(InvalidValue) as e:
        parse_params(text)
    assert e.value.name == "R1"
    assert "asymmetric" in e.value.reason


def test_missing_field(p):
    text = "\n".join(l for l in dump_params(p).splitlines() if not l.startswith("L3 "))
    with pytest.raises(MissingField) as e:
        parse_params(text)
    assert e.value.name == "L3"


@pytest.mark.parametrize("line,err", [
    ("L1 = 750", ParseError),          # missing unit
    ("L1 = 750 rad", ParseError),      # wrong unit
    ("L1 = abc mm", ParseError),
    ("bogus = 1 mm", ParseError),
    ("L1 750 mm", ParseError),
])
def test_parse_errors(p, line, err):
    text = "\n".join(l for l in dump_params(p).splitlines() if not l.startswith("L1 ")) + "\n" + line
    with pytest.raises(err):
        parse_params(text)


def test_duplicate_key(p):
    with pytest.raises(ParseError):
        parse_params(dump_params(p) + "L1 = 700 mm\n")


@pytest.mark.parametrize("change", [
    dict(L1=-1.0), dict(L1=math.inf), dict(rho_min=(900.0, 200.0, 200.0)),
    dict(passive_cone_half_angle=2.0), dict(rod_clearance=-1.0),
    dict(theta1_range=(1.0, -1.0)), dict(L1=50.0), dict(D2=250.0, d2=200.0),
])
def test_invariants(p, change):
    with pytest.raises(InvalidValue):
        p.replace(**change)


def test_scalar_stroke_broadcasts(p):
    text = dump_params(p).replace("rho_min = 200.0, 200.0, 200.0 mm", "rho_min = 210 mm")
    assert parse_params(text).rho_min == (210.0, 210.0, 210.0)


def test_comments_and_blank_lines(p):
    text = "# header\n\n" + dump_params(p).replace("\n", "  # c\n", 1)
    assert parse_params(text) == p


def test_geometry_vector(p):
    g = p.geometry()
    assert g.dtype == np.float64 and g.shape == (12,)
    assert g[0] == p.D1 and g[-1] == p.L3


def test_reference_is_frozen():
    assert reference_params() == reference_params()
