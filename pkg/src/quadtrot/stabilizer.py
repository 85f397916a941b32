"""Real-time feedback around the open-loop plan: posture control through
support-foot acceleration offsets, lateral-symmetry trunk-offset
regulation, trunk velocity estimation from stance feet, and an early
touchdown latch for obstacle strikes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gait import LegPhase
from .geometry import Leg


@dataclass
class PostureSetpoint:
    """Desired and measured trunk roll/pitch with rates (rad, rad/s)."""

    roll_d: float = 0.0
    pitch_d: float = 0.0
    roll_rate_d: float = 0.0
    pitch_rate_d: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    roll_rate: float = 0.0
    pitch_rate: float = 0.0


@dataclass(frozen=True)
class PostureGains:
    """PD gains mapping attitude error to support-foot acceleration."""

    kp_pitch: float = 2.0
    kd_pitch: float = 0.1
    kp_roll: float = 2.0
    kd_roll: float = 0.1
    p_adj_max: float = 0.02  # hard clamp on the integrated offset (m)


def posture_accel(sp: PostureSetpoint, gains: PostureGains) -> tuple[float, float]:
    """Foot acceleration commands (x from pitch, y from roll).

    Both support feet receive the same value; positive pitch error
    commands positive-x foot acceleration.
    """
    ax = (gains.kp_pitch * (sp.pitch_d - sp.pitch)
          + gains.kd_pitch * (sp.pitch_rate_d - sp.pitch_rate))
    ay = (gains.kp_roll * (sp.roll_d - sp.roll)
          + gains.kd_roll * (sp.roll_rate_d - sp.roll_rate))
    return ax, ay


@dataclass
class AdjustState:
    """Double-integrator state of one leg's stance position offset."""

    pos_x: float = 0.0
    vel_x: float = 0.0
    pos_y: float = 0.0
    vel_y: float = 0.0
    saturated: bool = False

    def reset(self) -> None:
        self.pos_x = self.vel_x = self.pos_y = self.vel_y = 0.0
        self.saturated = False


def integrate_adjust(state: AdjustState, ax: float, ay: float, dt: float,
                     p_adj_max: float) -> tuple[float, float]:
    """Trapezoidal double integration of the adjustment acceleration.

    The position offset is clamped to +/- p_adj_max with the velocity
    zeroed at the clamp (anti-windup); the state is reset externally at
    each stance entry.
    """
    state.saturated = False
    for axis in ("x", "y"):
        a = ax if axis == "x" else ay
        v0 = getattr(state, f"vel_{axis}")
        p0 = getattr(state, f"pos_{axis}")
        v1 = v0 + a * dt
        p1 = p0 + 0.5 * (v0 + v1) * dt
        if abs(p1) > p_adj_max:
            p1 = p_adj_max if p1 > 0 else -p_adj_max
            v1 = 0.0
            state.saturated = True
        setattr(state, f"vel_{axis}", v1)
        setattr(state, f"pos_{axis}", p1)
    return state.pos_x, state.pos_y


@dataclass
class TouchdownLog:
    """Latest touchdown lateral positions, one slot per leg."""

    y: dict = field(default_factory=dict)

    def record(self, leg: Leg, y: float) -> None:
        self.y[leg] = float(y)

    def complete(self) -> bool:
        return len(self.y) == 4


def com_correction(log: TouchdownLog, k_com: float) -> float:
    """Forward landing-target shift from front/rear touchdown asymmetry.

    A trunk offset along x shows up as mirrored lateral lean during the
    front vs. rear swings; the correction is k_com * (lh - lf + rf - rh)
    of the logged touchdown y values. Returns 0 until all four legs have
    logged a touchdown.
    """
    if not log.complete():
        return 0.0
    return k_com * (log.y[Leg.LH] - log.y[Leg.LF]
                    + log.y[Leg.RF] - log.y[Leg.RH])


@dataclass
class VelocityEstimate:
    vx: float = 0.0
    vy: float = 0.0
    stale: bool = False


class VelocityEstimator:
    """Trunk velocity from stance feet under the no-slip assumption.

    The raw estimate is minus the mean support-foot velocity in the body
    frame, smoothed by a first-order low-pass; with no feet on the ground
    the last value is held and flagged stale.
    """

    def __init__(self, cutoff_hz: float = 10.0):
        self.tau = 1.0 / (2.0 * 3.141592653589793 * cutoff_hz)
        self.state = VelocityEstimate()
        self._initialized = False

    def update(self, support_velocities, dt: float) -> VelocityEstimate:
        """support_velocities: iterable of body-frame (vx, vy) per stance foot."""
        vels = list(support_velocities)
        if not vels:
            self.state.stale = True
            return self.state
        raw_x = -sum(v[0] for v in vels) / len(vels)
        raw_y = -sum(v[1] for v in vels) / len(vels)
        if not self._initialized:
            self.state.vx, self.state.vy = raw_x, raw_y
            self._initialized = True
        else:
            alpha = dt / (self.tau + dt)
            self.state.vx += alpha * (raw_x - self.state.vx)
            self.state.vy += alpha * (raw_y - self.state.vy)
        self.state.stale = False
        return self.state


class EarlyTouchdownLatch:
    """Freezes the vertical command when a swing foot strikes early.

    A touchdown that begins during swing (rising contact edge) latches
    the current z command and zeroes its rate while the contact lasts,
    up to the scheduled support phase; x/y commands are not affected.
    Contact that merely persists from the leg's own stance does not
    latch, so the scheduled liftoff still commands the foot up, and a
    freeze releases as soon as the contact is gone (nothing left to
    push against).
    """

    def __init__(self):
        self._frozen_z: float | None = None

    @property
    def active(self) -> bool:
        return self._frozen_z is not None

    def update(self, phase: LegPhase, contact: bool, new_contact: bool,
               z_cmd: float, vz_cmd: float) -> tuple[float, float]:
        if phase == LegPhase.SUPPORT:
            self._frozen_z = None
            return z_cmd, vz_cmd
        if self._frozen_z is not None:
            if not contact:
                self._frozen_z = None
                return z_cmd, vz_cmd
            return self._frozen_z, 0.0
        if new_contact and phase in (LegPhase.SWING_UP, LegPhase.SWING_DOWN):
            self._frozen_z = z_cmd
            return z_cmd, 0.0
        return z_cmd, vz_cmd
