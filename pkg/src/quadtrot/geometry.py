"""Robot geometry, frame conventions, and closed-form leg kinematics.

Frames: the body frame sits at the trunk's geometric center with x forward,
z up, and y following the right-hand rule (left). Each leg carries a hip
frame at its mounting point with axes parallel to the body frame; all foot
planning is expressed there.

Leg layout: roll joint at the hip, then hip pitch and knee pitch. At the
zero pose the leg hangs straight down and the hip link points laterally
outward (+y on left legs, -y on right legs). Positive pitch swings the
foot forward (+x). The knee bends backward on all four legs, which fixes
a single inverse-kinematics branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class Leg(IntEnum):
    LF = 1
    RF = 2
    LH = 3
    RH = 4

    @property
    def side(self) -> int:
        """+1 for left legs, -1 for right legs."""
        return 1 if self in (Leg.LF, Leg.LH) else -1

    @property
    def group(self) -> str:
        """Diagonal pair: 'L' = {LF, RH}, 'R' = {RF, LH}."""
        return "L" if self in (Leg.LF, Leg.RH) else "R"

    @property
    def front(self) -> bool:
        return self in (Leg.LF, Leg.RF)


LEGS = (Leg.LF, Leg.RF, Leg.LH, Leg.RH)
GROUP_LEGS = {"L": (Leg.LF, Leg.RH), "R": (Leg.RF, Leg.LH)}


class UnreachableTarget(ValueError):
    """Foot target lies outside the leg workspace."""


@dataclass(frozen=True)
class RobotGeometry:
    """Trunk dimensions, link lengths, mass, and gravity.

    Defaults describe the desk-scale test robot (1.9 kg, 0.167 m trunk).
    """

    L: float = 0.167    # body length (m)
    W1: float = 0.162   # shoulder width (m)
    W2: float = 0.142   # hip width (m)
    a1: float = 0.046   # hip link length (m)
    a2: float = 0.066   # thigh length (m)
    a3: float = 0.065   # crus length (m)
    mass: float = 1.9   # total mass (kg)
    g: float = 9.81     # gravity (m/s^2)

    def __post_init__(self) -> None:
        for name in ("L", "W1", "W2", "a1", "a2", "a3", "mass", "g"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"geometry field {name} must be > 0")

    @property
    def weight(self) -> float:
        return self.mass * self.g

    @property
    def max_reach(self) -> float:
        """Largest hip-to-foot distance the chain can realize."""
        return math.sqrt(self.a1 ** 2 + (self.a2 + self.a3) ** 2)

    @property
    def min_planar_reach(self) -> float:
        """Smallest extension of the two-link pitch chain."""
        return abs(self.a2 - self.a3)


@dataclass(frozen=True)
class JointLimits:
    roll: float = math.pi / 2
    pitch: float = math.pi

    def contains(self, q: "JointAngles") -> bool:
        return (abs(q.q1) <= self.roll and abs(q.q2) <= self.pitch
                and abs(q.q3) <= self.pitch)


@dataclass
class JointAngles:
    """Roll, hip pitch, knee pitch (rad)."""

    q1: float
    q2: float
    q3: float
    near_singular: bool = field(default=False, compare=False)

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3])


def hip_origin(leg: Leg, geom: RobotGeometry) -> np.ndarray:
    """Leg mounting point in the body frame (z = 0 at the trunk plane)."""
    x = geom.L / 2 if leg.front else -geom.L / 2
    half_w = geom.W1 / 2 if leg.front else geom.W2 / 2
    return np.array([x, leg.side * half_w, 0.0])


def fk_foot(leg: Leg, q: JointAngles, geom: RobotGeometry,
            qd: np.ndarray | None = None) -> np.ndarray:
    """Foot position in the hip frame; pass qd to also get the velocity.

    Returns the position (3,), or (position, velocity) when qd is given.
    """
    s2, c2 = math.sin(q.q2), math.cos(q.q2)
    s23, c23 = math.sin(q.q2 + q.q3), math.cos(q.q2 + q.q3)
    x_leg = geom.a2 * s2 + geom.a3 * s23
    z_leg = -(geom.a2 * c2 + geom.a3 * c23)
    y0 = leg.side * geom.a1
    s1, c1 = math.sin(q.q1), math.cos(q.q1)
    p = np.array([x_leg,
                  c1 * y0 - s1 * z_leg,
                  s1 * y0 + c1 * z_leg])
    if qd is None:
        return p
    v = jacobian(leg, q, geom) @ np.asarray(qd, dtype=float)
    return p, v


def ik_leg(leg: Leg, p: np.ndarray, geom: RobotGeometry) -> JointAngles:
    """Joint angles reaching hip-frame point p on the knee-backward branch.

    Raises UnreachableTarget when p lies outside the workspace annulus.
    A solution within 1e-6 rad of full knee extension is returned with
    `near_singular` set.
    """
    px, py, pz = float(p[0]), float(p[1]), float(p[2])
    r2 = py * py + pz * pz
    a1 = geom.a1
    d2 = px * px + r2 - a1 * a1
    if d2 < 0.0:
        raise UnreachableTarget(f"target {p} inside the hip-link cylinder")
    d = math.sqrt(d2)
    lo, hi = geom.min_planar_reach, geom.a2 + geom.a3
    if d > hi + 1e-12 or d < lo - 1e-12:
        raise UnreachableTarget(
            f"target {p} at planar distance {d:.4f} outside [{lo:.4f}, {hi:.4f}]")

    # Un-roll: the leg plane must pass through y = side*a1 with the chain below.
    z_leg2 = r2 - a1 * a1
    z_leg = -math.sqrt(max(0.0, z_leg2))
    q1 = math.atan2(pz, py) - math.atan2(z_leg, leg.side * a1)
    q1 = math.atan2(math.sin(q1), math.cos(q1))

    cos_q3 = (d2 - geom.a2 ** 2 - geom.a3 ** 2) / (2 * geom.a2 * geom.a3)
    cos_q3 = min(1.0, max(-1.0, cos_q3))
    q3 = math.acos(cos_q3)  # knee-backward branch: q3 >= 0
    q2 = math.atan2(px, -z_leg) - math.atan2(
        geom.a3 * math.sin(q3), geom.a2 + geom.a3 * math.cos(q3))

    near = q3 < 1e-6 or (math.pi - q3) < 1e-6
    return JointAngles(q1, q2, q3, near_singular=near)


def jacobian(leg: Leg, q: JointAngles, geom: RobotGeometry) -> np.ndarray:
    """3x3 foot-velocity Jacobian in the hip frame (v = J @ qdot)."""
    s1, c1 = math.sin(q.q1), math.cos(q.q1)
    s2, c2 = math.sin(q.q2), math.cos(q.q2)
    s23, c23 = math.sin(q.q2 + q.q3), math.cos(q.q2 + q.q3)
    x_leg = geom.a2 * s2 + geom.a3 * s23
    z_leg = -(geom.a2 * c2 + geom.a3 * c23)
    y0 = leg.side * geom.a1

    p = np.array([x_leg, c1 * y0 - s1 * z_leg, s1 * y0 + c1 * z_leg])
    # Roll column is the x-axis cross product with the foot vector.
    col1 = np.array([0.0, -p[2], p[1]])

    dx2 = geom.a2 * c2 + geom.a3 * c23
    dz2 = geom.a2 * s2 + geom.a3 * s23
    col2 = np.array([dx2, -s1 * dz2, c1 * dz2])

    dx3 = geom.a3 * c23
    dz3 = geom.a3 * s23
    col3 = np.array([dx3, -s1 * dz3, c1 * dz3])
    return np.column_stack([col1, col2, col3])


def clamp_to_workspace(leg: Leg, p: np.ndarray, geom: RobotGeometry,
                       margin: float = 1.5e-3) -> tuple[np.ndarray, bool]:
    """Project p radially onto the reachable annulus, shrunk by margin.

    Returns (possibly clamped point, clamped flag).
    """
    p = np.asarray(p, dtype=float)
    a1 = geom.a1
    hi = geom.a2 + geom.a3 - margin
    lo = geom.min_planar_reach + margin
    r2 = float(p @ p)
    d2 = r2 - a1 * a1
    if d2 >= lo * lo and d2 <= hi * hi:
        return p, False
    if r2 < 1e-12:
        # Degenerate center target: push straight down to the inner bound.
        return np.array([0.0, leg.side * a1, -lo]), True
    d_target = hi if d2 > hi * hi else lo
    scale = math.sqrt((a1 * a1 + d_target * d_target) / r2)
    return p * scale, True
