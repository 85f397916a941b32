import math

import numpy as np

from quadtrot.gait import LegPhase
from quadtrot.geometry import Leg
from quadtrot.stabilizer import (AdjustState, EarlyTouchdownLatch,
                                 PostureGains, PostureSetpoint, TouchdownLog,
                                 VelocityEstimator, com_correction,
                                 integrate_adjust, posture_accel)
from oracles import _rk4


def test_posture_accel_zero_error():
    assert posture_accel(PostureSetpoint(), PostureGains(2.0, 0.1, 2.0, 0.1)) == (0.0, 0.0)


def test_posture_accel_pitch_example():
    sp = PostureSetpoint(pitch_d=0.05, pitch=0.0)
    ax, ay = posture_accel(sp, PostureGains(kp_pitch=2.0, kd_pitch=0.1))
    assert abs(ax - 0.10) < 1e-15
    assert ay == 0.0


def test_posture_accel_linear():
    rng = np.random.default_rng(2)
    g = PostureGains(3.0, 0.4, 1.5, 0.2)
    for _ in range(50):
        r, p, rr, pr = rng.normal(size=4)
        sp1 = PostureSetpoint(roll=r, pitch=p, roll_rate=rr, pitch_rate=pr)
        sp2 = PostureSetpoint(roll=2 * r, pitch=2 * p, roll_rate=2 * rr,
                              pitch_rate=2 * pr)
        a1 = posture_accel(sp1, g)
        a2 = posture_accel(sp2, g)
        assert abs(a2[0] - 2 * a1[0]) < 1e-12
        assert abs(a2[1] - 2 * a1[1]) < 1e-12


def test_integrate_adjust_half_a_t_squared():
    st = AdjustState()
    dt = 1e-3
    for _ in range(100):
        integrate_adjust(st, 0.1, 0.0, dt, p_adj_max=0.02)
    assert abs(st.pos_x - 5.0e-4) < 1e-12
    assert st.pos_y == 0.0


def test_integrate_adjust_saturates():
    st = AdjustState()
    for _ in range(2000):
        integrate_adjust(st, 1.0, -1.0, 1e-3, p_adj_max=0.02)
    assert st.pos_x == 0.02
    assert st.pos_y == -0.02
    assert st.saturated


def test_adjust_reset():
    st = AdjustState()
    integrate_adjust(st, 1.0, 1.0, 0.01, p_adj_max=0.02)
    st.reset()
    assert (st.pos_x, st.vel_x, st.pos_y, st.vel_y) == (0, 0, 0, 0)


def test_com_correction_symmetric_zero():
    log = TouchdownLog()
    log.record(Leg.LF, 0.08)
    log.record(Leg.LH, 0.08)
    log.record(Leg.RF, -0.08)
    log.record(Leg.RH, -0.08)
    assert com_correction(log, 0.1) == 0.0


def test_com_correction_example():
    log = TouchdownLog()
    log.record(Leg.LH, 0.09)
    log.record(Leg.LF, 0.08)
    log.record(Leg.RF, -0.08)
    log.record(Leg.RH, -0.09)
    assert abs(com_correction(log, 0.1) - 0.002) < 1e-15
    assert com_correction(log, 0.0) == 0.0


def test_com_correction_incomplete_history():
    log = TouchdownLog()
    log.record(Leg.LF, 0.08)
    assert com_correction(log, 0.1) == 0.0
    assert not log.complete()


def test_com_correction_antisymmetric_front_rear_swap():
    log = TouchdownLog()
    vals = {Leg.LF: 0.07, Leg.RF: -0.09, Leg.LH: 0.10, Leg.RH: -0.06}
    for leg, y in vals.items():
        log.record(leg, y)
    swapped = TouchdownLog()
    swapped.record(Leg.LF, vals[Leg.LH])
    swapped.record(Leg.LH, vals[Leg.LF])
    swapped.record(Leg.RF, vals[Leg.RH])
    swapped.record(Leg.RH, vals[Leg.RF])
    assert abs(com_correction(log, 0.1) + com_correction(swapped, 0.1)) < 1e-15


def test_estimator_no_slip_inversion():
    est = VelocityEstimator(cutoff_hz=10.0)
    for _ in range(5000):
        out = est.update([(-0.8, 0.0), (-0.8, 0.0)], 1e-3)
    assert abs(out.vx - 0.8) < 1e-9
    assert abs(out.vy) < 1e-12
    assert not out.stale


def test_estimator_step_response_matches_first_order():
    est = VelocityEstimator(cutoff_hz=10.0)
    est.update([(0.0, 0.0)], 1e-3)  # initialize at zero
    est.state.vx = 0.0
    dt = 1e-4
    tau = est.tau
    n = int(round(3 * tau / dt))
    for _ in range(n):
        out = est.update([(-1.0, 0.0)], dt)
    # Discrete first-order filter after 3 time constants: ~95%.
    assert 0.94 < out.vx < 0.96


def test_estimator_holds_during_flight():
    est = VelocityEstimator()
    for _ in range(2000):
        est.update([(-0.5, 0.1)], 1e-3)
    held = est.update([], 1e-3)
    assert held.stale
    assert abs(held.vx - 0.5) < 1e-3


def test_early_latch_freeze_until_support():
    latch = EarlyTouchdownLatch()
    # Swing-down descending commands, contact arrives at 90% of swing.
    z_cmds = np.linspace(-0.10, -0.12, 100)
    out = []
    for i, z in enumerate(z_cmds):
        contact = i >= 90
        new = i == 90
        out.append(latch.update(LegPhase.SWING_DOWN, contact, new, z, -0.1))
    for z, vz in out[90:]:
        assert z == z_cmds[90]
        assert vz == 0.0
    # Scheduled support entry resumes the plan.
    z, vz = latch.update(LegPhase.SUPPORT, True, False, -0.12, 0.0)
    assert z == -0.12 and not latch.active


def test_early_latch_ignores_persisting_stance_contact():
    latch = EarlyTouchdownLatch()
    z, vz = latch.update(LegPhase.RETRACT, True, False, -0.10, 1.0)
    assert (z, vz) == (-0.10, 1.0) and not latch.active


def test_early_latch_releases_when_contact_lost():
    latch = EarlyTouchdownLatch()
    latch.update(LegPhase.SWING_UP, True, True, -0.09, 0.5)
    assert latch.active
    z, vz = latch.update(LegPhase.SWING_UP, False, False, -0.08, 0.5)
    assert (z, vz) == (-0.08, 0.5) and not latch.active


def test_early_latch_no_contact_passthrough():
    latch = EarlyTouchdownLatch()
    z, vz = latch.update(LegPhase.SWING_DOWN, False, False, -0.11, -0.2)
    assert (z, vz) == (-0.11, -0.2)
