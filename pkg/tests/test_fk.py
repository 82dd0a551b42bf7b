import math

import numpy as np
import pytest

from verne.coupling import ellipse_point, iso_orientation_ellipse
from verne.constraints import closed_form_residuals, normalized
from verne.errors import NoAssembly, SingularDenominator
from verne.fk import (Y_ELIMINATION, Z_ELIMINATION, classify_assembly_mode, elimination_residual,
                      fk_back_substitute, fk_machine, fk_octic, fk_parallel, solve_at_orientation,
                      special_orientations)
from verne.ik import _leg_roots, filter_feasible, ik_parallel
from verne.polyroots import horner, real_roots
from verne.transforms import PlatformPose, TableOrientation

REF_POSE = (-240.0, -86.0, 1000.0)


@pytest.fixture(scope="module")
def ref_survivor(p):
    return filter_feasible(ik_parallel(*REF_POSE, p), p)[0]


def test_symmetric_zero_orientation(p):
    """At alpha = 0 with rho2 = rho3 the z step divides by zero; the direct solver gives y = 0."""
    rho = (500.0, 420.0, 420.0)
    with pytest.raises(SingularDenominator) as e:
        fk_back_substitute(0.0, rho, p)
    assert e.value.which == Z_ELIMINATION
    poses = solve_at_orientation(0.0, rho, p)
    assert poses and all(abs(q.y) < 1e-9 for q in poses)


def test_back_substitute_y_singular(p):
    with pytest.raises(SingularDenominator) as e:
        fk_back_substitute(math.acos(p.r1 / p.R1), (500.0, 420.0, 430.0), p)
    assert e.value.which == Y_ELIMINATION


def test_back_substitute_z_singular(p):
    rho = (500.0, 420.0, 470.0)
    a = [x for x in special_orientations(rho, p) if abs(abs(x) - math.acos(p.r1 / p.R1)) > 1e-6][0]
    with pytest.raises(SingularDenominator) as e:
        fk_back_substitute(a, rho, p)
    assert e.value.which == Z_ELIMINATION


def test_back_substitute_recovers_pose(p, interior_poses, rng):
    for i in rng.choice(len(interior_poses), 50, replace=False):
        x, y, z, a = interior_poses[i]
        s = filter_feasible(ik_parallel(x, y, z, p), p)[0]
        try:
            poses = [fk_back_substitute(a, s.rho, p)]
        except SingularDenominator:
            poses = solve_at_orientation(a, s.rho, p)
        assert any(np.allclose(q[:3], (x, y, z), atol=1e-9) for q in poses)


def test_octic_interpolation_audit(p, rng):
    for _ in range(20):
        rho = rng.uniform(200, 800, 3)
        c = fk_octic(rho, p)
        assert len(c) == 9
        a = rng.uniform(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3, 50)
        s = np.tan(a / 2)
        ref = elimination_residual(a, rho, p) * (1 + s * s) ** 4
        assert np.max(np.abs(horner(c, s) - ref)) < 1e-9 * np.max(np.abs(c))


def test_octic_symmetric_root_at_zero(p):
    c = fk_octic((500.0, 420.0, 420.0), p)
    assert abs(c[0]) < 1e-12 * np.max(np.abs(c))
    assert len(real_roots(c)) <= 8


def test_symmetric_rho_stays_on_plane(p, rng):
    for _ in range(30):
        r1, r = rng.uniform(200, 800, 2)
        try:
            sols = fk_parallel((r1, r, r), p)
        except NoAssembly:
            continue
        for s in sols:
            assert abs(s.pose.y) < 1e-9
            assert min(abs(s.pose.alpha), abs(abs(s.pose.alpha) - math.pi)) < 1e-9


def test_residuals_and_count(p, rng):
    for _ in range(100):
        rho = rng.uniform(200, 800, 3)
        try:
            sols = fk_parallel(rho, p)
        except NoAssembly:
            continue
        assert len(sols) <= 8
        for s in sols:
            assert np.max(np.abs(s.residuals)) < 1e-9


def test_far_rho_no_assembly(p):
    with pytest.raises(NoAssembly):
        fk_parallel((200.0, 5000.0, -5000.0), p)


def test_solve_at_orientation_matches_chain(p, ref_survivor):
    s = ref_survivor
    poses = solve_at_orientation(s.alpha, s.rho, p)
    assert any(np.allclose(q[:3], REF_POSE, atol=1e-8) for q in poses)


def test_singular_orientation_handled(p):
    """A pose built exactly on the y guard is still found by the special solver."""
    p = p.replace(L2=1000.0, L3=1000.0)  # both parallelograms reach this roll angle
    a = math.acos(p.r1 / p.R1)
    e = iso_orientation_ellipse(a, p)
    x, y = ellipse_point(e, 2.0)
    pose = PlatformPose(float(x), float(y), 950.0, a)
    _, leg2, leg3 = _leg_roots(pose, p)
    rho = (950.0, leg2[0][0], leg3[0][0])  # u = 0 forces the leg I slider level with P
    sols = fk_parallel(rho, p)
    assert any(abs(s.pose.alpha - a) < 1e-9 and np.allclose(s.pose[:3], pose[:3], atol=1e-6)
               for s in sols)


def test_survivor_joint_values_single_mode(p, ref_survivor):
    """Joint values of a feasible configuration give exactly one machine-reachable mode: that configuration."""
    sols = fk_parallel(ref_survivor.rho, p)
    reach = [s for s in sols if s.mode.machine_reachable]
    assert len(reach) == 1
    assert np.allclose(reach[0].pose[:3], REF_POSE, atol=1e-7)
    assert reach[0].mode.legs == ("above",) * 3


def test_demo_joint_values_solve(p):
    sols = fk_parallel((674.0, 685.0, 250.0), p)
    assert 1 <= len(sols) <= 8
    for s in sols:
        assert np.max(np.abs(s.residuals)) < 1e-9


def test_leg_two_below_not_reachable(p, ref_survivor):
    s = ref_survivor
    lowered = s.rho._replace(rho2=s.pose.z + 50.0)
    mode = classify_assembly_mode(s.pose, lowered, p)
    assert mode.legs[1] == "below" and not mode.machine_reachable


def test_labels_stable(p, ref_survivor):
    s = ref_survivor
    base = classify_assembly_mode(s.pose, s.rho, p)
    bumped = PlatformPose(s.pose.x + 1e-12, s.pose.y - 1e-12, s.pose.z + 1e-12, s.pose.alpha + 1e-12)
    assert classify_assembly_mode(bumped, s.rho, p) == base


def test_machine_identity_angles(p, ref_survivor):
    sols = fk_parallel(ref_survivor.rho, p)
    tools = fk_machine(ref_survivor.rho, TableOrientation(0.0, 0.0), p)
    assert len(tools) == len(sols)
    for s, t in zip(sols, tools):
        assert t.phi1 == s.pose.alpha and t.phi2 == 0.0


def test_sorted_output(p, rng):
    rho = rng.uniform(300, 700, 3)
    try:
        sols = fk_parallel(rho, p)
    except NoAssembly:
        return
    keys = [(s.pose.alpha, s.pose.x) for s in sols]
    assert keys == sorted(keys)


def test_guard_distances_reported(p, ref_survivor):
    for s in fk_parallel(ref_survivor.rho, p):
        assert s.y_guard_distance > 1.0 and s.z_guard_distance > 1.0 and not s.singular
        r = normalized(closed_form_residuals(s.pose, ref_survivor.rho, p), p)
        assert np.allclose(r, s.residuals)
