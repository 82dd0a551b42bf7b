import math

import numpy as np
import pytest

from verne.coupling import coupling_residual_scaled
from verne.errors import MultipleFeasible, NoFeasibleSolution, Unreachable
from verne.ik import (LOWER, UPPER, IkCandidate, feasibility_report, filter_feasible, ik_machine,
                      ik_parallel, orientation_polynomial, orientation_roots, slider_above)
from verne.polyroots import real_roots
from verne.transforms import (PlatformPose, TableOrientation, ToolPose, tool_pose_from_platform,
                              wrap_angle)

REF_POSE = (-240.0, -86.0, 1000.0)


def test_reference_pose_sixteen_candidates(p):
    cands = ik_parallel(*REF_POSE, p)
    assert len(cands) == 16
    assert len({c.alpha for c in cands}) == 4
    for c in cands:
        assert np.max(np.abs(c.residuals)) < 1e-9


def test_reference_pose_unique_survivor(p):
    survivor, reports = filter_feasible(ik_parallel(*REF_POSE, p), p)
    assert survivor.branch == (UPPER, UPPER, UPPER)
    assert sum(r.feasible for r in reports) == 1
    assert p.R1 * math.cos(survivor.alpha) > p.r1


def test_symmetric_target_has_zero_root(p):
    c = orientation_polynomial((-100.0, 0.0, 900.0), p)
    assert len(c) == 7
    assert abs(c[0]) < 1e-12 * np.max(np.abs(c))
    assert 0.0 in orientation_roots((-100.0, 0.0, 900.0), p)


def test_symmetric_closed_form(p):
    x, z = -100.0, 900.0
    cands = [c for c in ik_parallel(x, 0.0, z, p) if c.alpha == 0.0]
    r = math.sqrt(p.L1**2 - (x + p.D1 - p.d1) ** 2 - (p.R1 - p.r1) ** 2)
    assert {round(c.rho.rho1, 9) for c in cands} == {round(z - r, 9), round(z + r, 9)}


def test_symmetric_target_count_bound(p):
    """On y = 0 the double roots at 0 and pi keep both leg I branches: up to 24 candidates."""
    cands = ik_parallel(-100.0, 0.0, 900.0, p)
    assert len(cands) <= 24


def test_far_point_unreachable(p):
    with pytest.raises(Unreachable):
        ik_parallel(5000.0, 0.0, 900.0, p)


def test_roots_satisfy_relation(p, rng):
    for _ in range(200):
        x, y = rng.uniform(-600, 400), rng.uniform(-300, 300)
        for a in orientation_roots((x, y, 900.0), p):
            assert abs(coupling_residual_scaled(x, y, a, p)) < 1e-9


def test_polynomial_roots_match(p):
    c = orientation_polynomial(REF_POSE, p)
    ts = sorted(math.tan(a / 2) for a in orientation_roots(REF_POSE, p))
    got = [r.value for r in real_roots(c)]
    assert np.allclose(sorted(got), ts, rtol=1e-7)


def test_sorted_and_deterministic(p):
    a = ik_parallel(*REF_POSE, p)
    assert [c.sort_key() for c in a] == sorted(c.sort_key() for c in a)
    b = ik_parallel(*REF_POSE, p)
    assert [(c.alpha, c.rho) for c in a] == [(c.alpha, c.rho) for c in b]


def test_round_trip_recovers_configuration(p, interior_poses, rng):
    for i in rng.choice(len(interior_poses), 50, replace=False):
        x, y, z, a = interior_poses[i]
        s, _ = filter_feasible(ik_parallel(x, y, z, p), p)
        assert abs(s.alpha - a) < 1e-12


def test_machine_round_trip(p, interior_poses, rng):
    for i in rng.choice(len(interior_poses), 30, replace=False):
        pose = PlatformPose(*interior_poses[i])
        o = TableOrientation(rng.uniform(-1.0, 1.0), rng.uniform(-1, 1))
        tool = tool_pose_from_platform(pose, o, p)
        cands = ik_machine(tool, p)
        assert len(cands) <= 16
        assert all(c.theta2 == -tool.phi2 for c in cands)
        hit = [c for c in cands if abs(c.theta1 - o.theta1) < 1e-9]
        assert hit
        assert any(np.allclose(c.pose[:3], pose[:3], atol=1e-6) for c in hit)
        for c in cands:
            assert c.alpha == wrap_angle(c.theta1 + tool.phi1)


def test_theta2_assignment_exact(p):
    tool = ToolPose(-200.0, 50.0, 300.0, 0.1, 0.3)
    cands = ik_machine(tool, p)
    assert all(c.theta2 == -0.3 for c in cands)


def test_slider_above_predicate():
    assert slider_above(100.0, 200.0)
    assert not slider_above(200.0, 100.0)


def _cand(p, alpha, rho):
    pose = PlatformPose(-240.0, -86.0, 1000.0, alpha)
    return IkCandidate(alpha, pose, rho, (UPPER,) * 3, np.zeros(4))


def test_rod_crossing_boundary(p):
    eps = 1e-6
    alpha = math.acos((p.r1 - eps) / p.R1)
    rep = feasibility_report(_cand(p, alpha, (400.0, 400.0, 400.0)), p)
    assert not rep.rod_crossing
    assert "rod_crossing" in rep.failures()


def test_stroke_flag(p):
    s, _ = filter_feasible(ik_parallel(*REF_POSE, p), p)
    bad = IkCandidate(s.alpha, s.pose, s.rho._replace(rho2=p.rho_max[1] + 1.0), s.branch, s.residuals)
    rep = feasibility_report(bad, p)
    assert rep.stroke == (True, False, True) and not rep.feasible


def test_theta1_range_flag(p):
    s, _ = filter_feasible(ik_parallel(*REF_POSE, p), p)
    out = IkCandidate(s.alpha, s.pose, s.rho, s.branch, s.residuals, theta1=2.0, theta2=0.0)
    assert not feasibility_report(out, p).orientation_in_range


def test_filter_errors(p):
    cands = ik_parallel(*REF_POSE, p)
    s, _ = filter_feasible(cands, p)
    with pytest.raises(MultipleFeasible) as e:
        filter_feasible([s, s], p)
    assert len(e.value.survivors) == 2
    with pytest.raises(NoFeasibleSolution):
        filter_feasible([c for c in cands if c is not s], p)


def test_lower_tag_has_larger_z(p):
    for c in ik_parallel(*REF_POSE, p):
        if c.branch[1] == LOWER:
            assert not slider_above(c.rho.rho2, c.pose.z - p.R2 * math.sin(c.alpha))


def test_machine_tangent_orientation(p):
    """A y = 0, alpha = 0 pose seen through a tilted table keeps its double root."""
    pose = PlatformPose(287.45269898787933, 0.0, 1077.5, 0.0)
    o = TableOrientation(-0.07855008701534061, 0.6117242396139557)
    tool = tool_pose_from_platform(pose, o, p)
    cands = ik_machine(tool, p)
    hit = [c for c in cands if c.theta1 == wrap_angle(-tool.phi1)]
    assert hit and all(c.alpha == 0.0 for c in hit)
    assert any(np.allclose(c.pose[:3], pose[:3], atol=1e-9) for c in hit)
