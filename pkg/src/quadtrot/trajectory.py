"""Foot trajectory synthesis: vertical keyframes, Hermite interpolation,
horizontal support/swing planning, and heading rotation.

Vertical motion is a piecewise cubic Hermite through five knots (landing,
liftoff, retract end, swing apex, landing again); pairing positions with
velocities at every knot makes the curve C1 and lets the retract segment
reproduce the exact constant-acceleration parabola.

Horizontal stance motion runs backward at the commanded speed; the swing
returns the foot to a landing target chosen from the estimated trunk
speed (neutral point) plus a proportional speed-error correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gait import GaitParams, PhaseTimeline, derive_timeline


class KeyframeOrderError(ValueError):
    """Retraction would end above the swing apex."""


@dataclass(frozen=True)
class FlightProfile:
    """Trunk takeoff/landing speeds and flight time."""

    v_takeoff: float   # >= 0
    v_touchdown: float  # <= 0
    t_flight: float


@dataclass(frozen=True)
class RaibertGains:
    """Landing-target selection: neutral-point factor and speed correction."""

    k_comp: float = 0.03
    neutral_factor: float = 0.5


def flight_profile(params: GaitParams) -> FlightProfile:
    v_up = params.vx / params.c1
    v_land = -math.sqrt(v_up * v_up + 2 * params.g * params.hsd)
    t_fp = (v_up - v_land) / params.g
    return FlightProfile(v_takeoff=v_up, v_touchdown=v_land, t_flight=t_fp)


@dataclass(frozen=True)
class ZKeyframes:
    """Knot times, positions, and velocities of the vertical foot path."""

    times: tuple[float, ...]
    pos: tuple[float, ...]
    vel: tuple[float, ...]

    def spline(self) -> "HermiteSpline":
        return HermiteSpline(self.times, self.pos, self.vel)


def synth_z_keyframes(params: GaitParams,
                      timeline: PhaseTimeline | None = None) -> ZKeyframes:
    """Vertical knots for one gait cycle.

    Knot 0/4: landing at zs with the cushion lift speed c2 * v_touchdown.
    Knot 1: liftoff at zs - hsd moving at -vx/c1.
    Knot 2: retract end after constant upward acceleration |c3| g.
    Knot 3: swing apex at zs + hwa with zero velocity.
    """
    if timeline is None:
        timeline = derive_timeline(params)
    prof = flight_profile(params)
    d1, d2, d3, d4 = timeline.durations

    v0 = params.c2 * prof.v_touchdown
    v1 = -params.vx / params.c1
    v2 = params.c4 * v1
    p0 = params.zs
    p1 = params.zs - params.hsd
    p2 = (params.zs - params.hsd
          + (params.c4 ** 2 - 1.0) * params.vx ** 2
          / (2.0 * abs(params.c3) * params.g * params.c1 ** 2))
    p3 = params.zs + params.hwa
    if p2 >= p3:
        raise KeyframeOrderError(
            f"retract end {p2:.4f} not below swing apex {p3:.4f}")

    t1 = d1
    t2 = d1 + d2
    t3 = d1 + d2 + d3
    T = t3 + d4
    return ZKeyframes(times=(0.0, t1, t2, t3, T),
                      pos=(p0, p1, p2, p3, p0),
                      vel=(v0, v1, v2, 0.0, v0))


class HermiteSpline:
    """Piecewise cubic Hermite through (time, position, velocity) knots.

    Zero-length segments (coincident knot times) are dropped; the knot
    data on both sides of a dropped segment must agree.
    """

    def __init__(self, times, pos, vel):
        t, p, v = [float(times[0])], [float(pos[0])], [float(vel[0])]
        for i in range(1, len(times)):
            if times[i] - t[-1] > 1e-12:
                t.append(float(times[i]))
                p.append(float(pos[i]))
                v.append(float(vel[i]))
        self.t = np.array(t)
        self.p = np.array(p)
        self.v = np.array(v)
        if len(self.t) < 2:
            raise ValueError("need at least two distinct knot times")

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def eval(self, t: float) -> tuple[float, float, float]:
        """Position, velocity, acceleration at time t (clamped to the span)."""
        t = min(max(t, self.t[0]), self.t[-1])
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        i = min(max(i, 0), len(self.t) - 2)
        dt = self.t[i + 1] - self.t[i]
        s = (t - self.t[i]) / dt
        p0, p1 = self.p[i], self.p[i + 1]
        m0, m1 = self.v[i] * dt, self.v[i + 1] * dt

        h00 = (2 * s - 3) * s * s + 1
        h10 = ((s - 2) * s + 1) * s
        h01 = (3 - 2 * s) * s * s
        h11 = (s - 1) * s * s
        pos = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1

        d00 = 6 * s * (s - 1)
        d10 = (3 * s - 4) * s + 1
        d01 = -d00
        d11 = (3 * s - 2) * s
        vel = (d00 * p0 + d10 * m0 + d01 * p1 + d11 * m1) / dt

        g00 = 12 * s - 6
        g10 = 6 * s - 4
        g01 = -g00
        g11 = 6 * s - 2
        acc = (g00 * p0 + g10 * m0 + g01 * p1 + g11 * m1) / (dt * dt)
        return float(pos), float(vel), float(acc)


@dataclass(frozen=True)
class HermiteSegment:
    """Single cubic between two (position, velocity) endpoints."""

    t0: float
    t1: float
    p0: float
    p1: float
    v0: float
    v1: float

    def eval(self, t: float) -> tuple[float, float, float]:
        return HermiteSpline((self.t0, self.t1), (self.p0, self.p1),
                             (self.v0, self.v1)).eval(t)


def eval_z(keyframes: ZKeyframes, t: float) -> tuple[float, float, float]:
    """Vertical position, velocity, acceleration at cycle-local time t."""
    return keyframes.spline().eval(t)


def plan_support_x(p_x0: float, vx: float, t: float) -> float:
    """Stance foot sweeps backward at the commanded speed: p_x0 - vx*t."""
    return p_x0 - vx * t


def swing_target(v_est: float, v_cmd: float, t_stance: float,
                 gains: RaibertGains, correction: float = 0.0) -> float:
    """Landing offset from the hip: neutral point plus speed-error term."""
    return (gains.neutral_factor * v_est * t_stance
            + gains.k_comp * (v_est - v_cmd) + correction)


def plan_swing_x(p_x1: float, v_est: float, v_cmd: float,
                 timeline: PhaseTimeline, gains: RaibertGains,
                 correction: float = 0.0,
                 limit: float | None = None) -> tuple[float, HermiteSegment, bool]:
    """Swing curve from stance exit to the landing target.

    Both endpoints move at -v_cmd so the stance sweep continues smoothly
    through touchdown. A limit (if given) clamps the target magnitude and
    flags the clamp.
    """
    t_stance = timeline.durations[0]
    p_x2 = swing_target(v_est, v_cmd, t_stance, gains, correction)
    clamped = False
    if limit is not None and abs(p_x2) > limit:
        p_x2 = math.copysign(limit, p_x2)
        clamped = True
    seg = HermiteSegment(t0=t_stance, t1=timeline.T,
                         p0=p_x1, p1=p_x2, v0=-v_cmd, v1=-v_cmd)
    return p_x2, seg, clamped


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def apply_heading(p: np.ndarray, omega_z: float, t_phase: float,
                  is_support: bool) -> np.ndarray:
    """Rotate a planned body-frame foot point for heading control.

    Support points rotate by +omega_z * t_phase, swing points by the
    opposite angle, about the body-frame origin; z is unchanged.
    """
    angle = omega_z * t_phase if is_support else -omega_z * t_phase
    return rot_z(angle) @ np.asarray(p, dtype=float)


def apply_heading_with_velocity(p: np.ndarray, v: np.ndarray, omega_z: float,
                                t_phase: float, is_support: bool
                                ) -> tuple[np.ndarray, np.ndarray]:
    """Heading rotation of a point and the consistent velocity transform."""
    sgn = 1.0 if is_support else -1.0
    angle = sgn * omega_z * t_phase
    R = rot_z(angle)
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    rate = sgn * omega_z
    p_rot = R @ p
    v_rot = R @ v + rate * np.array([-p_rot[1], p_rot[0], 0.0])
    return p_rot, v_rot


class PlannedCycle:
    """Steady-state planned foot path over one cycle in the hip frame.

    Assumes perfect speed tracking (estimate equals command) and no
    stabilizer corrections, which closes the cycle: the swing lands where
    the next stance begins. x is relative to the hip, y relative to the
    leg's neutral lateral offset.
    """

    def __init__(self, params: GaitParams, gains: RaibertGains | None = None):
        self.params = params
        self.timeline = derive_timeline(params)
        self.keyframes = synth_z_keyframes(params, self.timeline)
        self._zspline = self.keyframes.spline()
        gains = gains or RaibertGains()
        t_stance = self.timeline.durations[0]
        self.p_x0 = gains.neutral_factor * params.vx * t_stance
        p_x1 = self.p_x0 - params.vx * t_stance
        self.swing_x = HermiteSegment(t0=t_stance, t1=self.timeline.T,
                                      p0=p_x1, p1=self.p_x0,
                                      v0=-params.vx, v1=-params.vx)

    def eval(self, tau: float) -> tuple[np.ndarray, np.ndarray]:
        """Planned (position, velocity) at cycle-local time tau in [0, T]."""
        z, vz, _ = self._zspline.eval(tau)
        t_stance = self.timeline.durations[0]
        if tau <= t_stance:
            x = plan_support_x(self.p_x0, self.params.vx, tau)
            vx = -self.params.vx
        else:
            x, vx, _ = self.swing_x.eval(tau)
        return np.array([x, 0.0, z]), np.array([vx, 0.0, vz])
