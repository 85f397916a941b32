"""Gait parameter validation, phase timeline derivation, and phase queries.

The trot cycle of period T = 1/f splits, per leg, into four windows:
support (foot loaded), retract (foot accelerates up off the ground),
swing-up (rise to clearance height), and swing-down (descend to landing).
Diagonal leg pairs share one schedule; the 'R' pair runs half a cycle
behind the 'L' pair.

Flight time follows projectile motion of the trunk: it leaves the ground
at v_up = vx/c1 and lands h_sd lower than it took off, so

    t_flight = (v_up + sqrt(v_up^2 + 2*g*h_sd)) / g

and the support window is T/2 - t_flight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum


class LegPhase(IntEnum):
    SUPPORT = 0
    RETRACT = 1
    SWING_UP = 2
    SWING_DOWN = 3


class GaitValidationError(ValueError):
    """Raised when an operation requires parameters that fail validation."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class InfeasibleGait(ValueError):
    """Parameter set is valid but yields no positive phase layout."""


@dataclass(frozen=True)
class GaitParams:
    """Tuning knobs that fully determine the foot trajectory.

    f     step frequency (Hz)
    vx    forward speed (m/s)
    zs    foot height in the hip frame at landing (m, negative)
    hwa   swing clearance rise above zs (m)
    hsd   support descent below zs before liftoff (m)
    c1    takeoff-angle ratio: v_up = vx / c1
    c2    landing-cushion ratio: foot lift speed at touchdown as a
          fraction of the (negative) trunk landing speed, in [-1, 0]
    c3    retract acceleration as a multiple of -g, at most -1
    c4    retract exit velocity ratio relative to the liftoff foot
          speed, at most 0
    c5    fraction of the remaining swing spent rising, in (0, 1)
    g     gravity (m/s^2)
    """

    f: float = 2.9
    vx: float = 0.0
    zs: float = -0.12
    hwa: float = 0.04
    hsd: float = 0.005
    c1: float = 4.0
    c2: float = -0.1
    c3: float = -3.0
    c4: float = -4.5
    c5: float = 0.2
    g: float = 9.81


@dataclass(frozen=True)
class PhaseTimeline:
    """Cycle period, per-phase durations, flight time, and group offsets."""

    T: float
    durations: tuple[float, float, float, float]  # support, retract, up, down
    t_flight: float

    def offset(self, group: str) -> float:
        return 0.0 if group == "L" else self.T / 2

    @property
    def boundaries(self) -> tuple[float, float, float, float]:
        d1, d2, d3, d4 = self.durations
        return (d1, d1 + d2, d1 + d2 + d3, d1 + d2 + d3 + d4)


def validate(params: GaitParams) -> list[str]:
    """Check every parameter bound; returns a list of violations (empty = ok)."""
    v: list[str] = []
    if not params.f > 0:
        v.append("f>0")
    if not params.zs < 0:
        v.append("zs<0")
    if not params.hwa > 0:
        v.append("hwa>0")
    if not params.hsd >= 0:
        v.append("hsd>=0")
    if not params.c1 > 0:
        v.append("c1>0")
    if not (-1.0 <= params.c2 <= 0.0):
        v.append("c2 in [-1,0]")
    if not params.c3 <= -1.0:
        v.append("c3<=-1")
    if not params.c4 <= 0.0:
        v.append("c4<=0")
    if not (0.0 < params.c5 < 1.0):
        v.append("c5 in (0,1)")
    if not params.g > 0:
        v.append("g>0")
    return v


def flight_time(params: GaitParams) -> float:
    """Ballistic trunk flight time for the takeoff speed vx/c1."""
    v_up = params.vx / params.c1
    return (v_up + math.sqrt(v_up * v_up + 2 * params.g * params.hsd)) / params.g


def derive_timeline(params: GaitParams) -> PhaseTimeline:
    """Compute the phase layout; raises on invalid or infeasible parameters."""
    violations = validate(params)
    if violations:
        raise GaitValidationError(violations)
    T = 1.0 / params.f
    t_fp = flight_time(params)
    d1 = T / 2 - t_fp
    if d1 <= 0.0:
        raise InfeasibleGait(
            f"flight time {t_fp:.4f}s leaves no support window at f={params.f}")
    d2 = (1.0 - params.c4) * params.vx / (params.c1 * abs(params.c3) * params.g)
    if d2 < 0.0:
        raise InfeasibleGait("retract duration negative (vx < 0?)")
    remainder = T - d1 - d2
    if remainder <= 0.0:
        raise InfeasibleGait("retraction consumes the whole swing window")
    d3 = params.c5 * remainder
    d4 = (1.0 - params.c5) * remainder
    return PhaseTimeline(T=T, durations=(d1, d2, d3, d4), t_flight=t_fp)


def cycle_time(timeline: PhaseTimeline, t: float, group: str) -> float:
    """Group-local time within [0, T)."""
    return (t - timeline.offset(group)) % timeline.T


def phase_at(timeline: PhaseTimeline, t: float, group: str) -> tuple[LegPhase, float]:
    """Phase and phase-local time at absolute time t for a leg group.

    Periodic in T; zero-length phases are skipped.
    """
    tau = cycle_time(timeline, t, group)
    start = 0.0
    for phase, dur in zip(LegPhase, timeline.durations):
        if dur > 0.0 and tau < start + dur:
            return phase, tau - start
        start += dur
    # Floating-point tail: land at the start of the wrap.
    return LegPhase.SUPPORT, 0.0


def planned_duty_factor(timeline: PhaseTimeline) -> float:
    """Support fraction of the cycle."""
    return timeline.durations[0] / timeline.T


def preferred_frequency(mass: float) -> float:
    """Allometric trot frequency for an animal of the given mass (Hz)."""
    if mass <= 0:
        raise ValueError("mass must be > 0")
    return 3.35 * mass ** -0.13


def preferred_speed(mass: float) -> float:
    """Allometric trot speed for an animal of the given mass (m/s)."""
    if mass <= 0:
        raise ValueError("mass must be > 0")
    return 1.09 * mass ** 0.222
