import math

import numpy as np
import pytest

from quadtrot.geometry import (LEGS, JointAngles, Leg, RobotGeometry,
                               UnreachableTarget, clamp_to_workspace, fk_foot,
                               hip_origin, ik_leg, jacobian)
from oracles import finite_diff_jacobian

GEOM = RobotGeometry()


def test_hip_origins():
    np.testing.assert_allclose(hip_origin(Leg.LF, GEOM), [0.0835, 0.081, 0.0])
    np.testing.assert_allclose(hip_origin(Leg.RF, GEOM), [0.0835, -0.081, 0.0])
    np.testing.assert_allclose(hip_origin(Leg.LH, GEOM), [-0.0835, 0.071, 0.0])
    np.testing.assert_allclose(hip_origin(Leg.RH, GEOM), [-0.0835, -0.071, 0.0])


def test_hip_origin_lateral_symmetry():
    assert hip_origin(Leg.LF, GEOM)[1] == -hip_origin(Leg.RF, GEOM)[1]
    assert hip_origin(Leg.LH, GEOM)[1] == -hip_origin(Leg.RH, GEOM)[1]


def test_hip_origin_depends_only_on_its_dimensions():
    longer = RobotGeometry(L=0.2)
    for leg in LEGS:
        base = hip_origin(leg, GEOM)
        new = hip_origin(leg, longer)
        assert new[0] != base[0]
        assert new[1] == base[1] and new[2] == base[2]


def test_fk_zero_pose():
    p = fk_foot(Leg.LF, JointAngles(0, 0, 0), GEOM)
    np.testing.assert_allclose(p, [0.0, 0.046, -0.131], atol=1e-15)
    p = fk_foot(Leg.RF, JointAngles(0, 0, 0), GEOM)
    np.testing.assert_allclose(p, [0.0, -0.046, -0.131], atol=1e-15)


def test_fk_knee_bent():
    p = fk_foot(Leg.LF, JointAngles(0, 0, math.pi / 2), GEOM)
    np.testing.assert_allclose(p, [0.065, 0.046, -0.066], atol=1e-12)


def test_fk_roll_quarter_turn_matches_rotation_oracle():
    # Rotating the zero-pose point about x by 90 degrees.
    zero = fk_foot(Leg.LF, JointAngles(0, 0, 0), GEOM)
    Rx = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float)
    p = fk_foot(Leg.LF, JointAngles(math.pi / 2, 0, 0), GEOM)
    np.testing.assert_allclose(p, Rx @ zero, atol=1e-12)
    np.testing.assert_allclose(p, [0.0, 0.131, 0.046], atol=1e-12)


def test_fk_mirror_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(200):
        q1, q2, q3 = rng.uniform(-1.2, 1.2, 3)
        left = fk_foot(Leg.LF, JointAngles(q1, q2, q3), GEOM)
        right = fk_foot(Leg.RF, JointAngles(-q1, q2, q3), GEOM)
        np.testing.assert_allclose(right, left * np.array([1, -1, 1]), atol=1e-14)


def test_ik_zero_pose():
    q = ik_leg(Leg.LF, np.array([0.0, 0.046, -0.131]), GEOM)
    assert abs(q.q1) < 1e-12 and abs(q.q2) < 1e-12 and abs(q.q3) < 1e-12
    # Fully extended knee is the singular configuration.
    assert q.near_singular


def test_ik_unreachable():
    with pytest.raises(UnreachableTarget):
        ik_leg(Leg.LF, np.array([0.0, 0.046, -0.50]), GEOM)


def _sample_in_branch(rng) -> JointAngles:
    # The solver returns knee-backward solutions with the planar chain
    # below the roll axis; sample inside that branch.
    while True:
        q = JointAngles(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                        rng.uniform(0.05, 2.6))
        z_leg = -(GEOM.a2 * math.cos(q.q2) + GEOM.a3 * math.cos(q.q2 + q.q3))
        if z_leg < -5e-3:
            return q


def test_fk_ik_round_trip_random():
    rng = np.random.default_rng(42)
    worst_pos = 0.0
    worst_ang = 0.0
    for leg in LEGS:
        for _ in range(250):
            q = _sample_in_branch(rng)
            p = fk_foot(leg, q, GEOM)
            q2 = ik_leg(leg, p, GEOM)
            p2 = fk_foot(leg, q2, GEOM)
            worst_pos = max(worst_pos, float(np.max(np.abs(p2 - p))))
            worst_ang = max(worst_ang,
                            abs(q2.q1 - q.q1), abs(q2.q2 - q.q2), abs(q2.q3 - q.q3))
    assert worst_pos < 1e-9
    assert worst_ang < 1e-9


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(7)
    for leg in LEGS:
        for _ in range(100):
            q = np.array([rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                          rng.uniform(0.05, 2.6)])
            J = jacobian(leg, JointAngles(*q), GEOM)
            J_fd = finite_diff_jacobian(
                lambda qq: fk_foot(leg, JointAngles(*qq), GEOM), q)
            assert np.max(np.abs(J - J_fd)) < 1e-5


def test_jacobian_roll_column_zero_pose():
    J = jacobian(Leg.LF, JointAngles(0, 0, 0), GEOM)
    np.testing.assert_allclose(J[:, 0], [0.0, GEOM.a2 + GEOM.a3, GEOM.a1],
                               atol=1e-15)


def test_jacobian_zero_rates():
    J = jacobian(Leg.RF, JointAngles(0.3, -0.2, 0.9), GEOM)
    np.testing.assert_allclose(J @ np.zeros(3), np.zeros(3))


def test_clamp_to_workspace():
    inside = np.array([0.0, 0.046, -0.12])
    p, clamped = clamp_to_workspace(Leg.LF, inside, GEOM)
    assert not clamped
    np.testing.assert_allclose(p, inside)

    outside = np.array([0.0, 0.046, -0.30])
    p, clamped = clamp_to_workspace(Leg.LF, outside, GEOM)
    assert clamped
    ik_leg(Leg.LF, p, GEOM)  # must be reachable after the clamp
    # Clamp is radial: direction preserved.
    np.testing.assert_allclose(p / np.linalg.norm(p),
                               outside / np.linalg.norm(outside), atol=1e-12)
