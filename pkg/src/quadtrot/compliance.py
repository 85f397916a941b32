"""Leg force generation: virtual spring-damper between desired and actual
foot state, feedforward gravity compensation, resonance-matched vertical
gain selection, and the transpose-Jacobian torque map.

Sign conventions: virtual_force returns the force pulling the foot toward
its desired state. The assembled foot command f_d is the force the leg
drives the foot with, so carrying weight means a negative z component;
the trunk feels the reaction -f_d through the (massless) leg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import RobotGeometry


@dataclass(frozen=True)
class VirtualGains:
    """Per-axis stiffness (N/m) and damping (N*s/m) of one leg."""

    kp: tuple[float, float, float]
    kd: tuple[float, float, float]


def virtual_force(p_d, v_d, p_f, v_f, gains: VirtualGains) -> np.ndarray:
    """Per-axis spring-damper force toward the desired foot state."""
    kp = np.asarray(gains.kp)
    kd = np.asarray(gains.kd)
    return kp * (np.asarray(p_d) - np.asarray(p_f)) + kd * (np.asarray(v_d) - np.asarray(v_f))


def tune_vertical_gains(dt_support: float, m_s: float,
                        zeta: float = 0.1) -> tuple[float, float]:
    """Stiffness/damping whose damped half oscillation equals the support time.

    The loaded leg behaves as m_s on a spring-damper; matching the damped
    half period to the support window lets one compression-extension
    stroke fit exactly into stance.
    """
    if dt_support <= 0 or m_s <= 0 or not (0.0 <= zeta < 1.0):
        raise ValueError("need dt_support > 0, m_s > 0, 0 <= zeta < 1")
    omega_d = math.pi / dt_support
    omega_n = omega_d / math.sqrt(1.0 - zeta * zeta)
    kp_z = m_s * omega_n * omega_n
    kd_z = 2.0 * zeta * math.sqrt(kp_z * m_s)
    return kp_z, kd_z


def stance_gains(dt_support: float, geom: RobotGeometry, zeta: float = 0.1,
                 xy_scale: float = 0.5,
                 kd_xy_scale: float | None = None) -> VirtualGains:
    """Leg gains with the tuned vertical pair and scaled horizontal axes.

    The vertical pair follows the resonance tuning; horizontal stiffness
    scales from kp_z. Horizontal damping gets its own scale (relative to
    the critical damping of the horizontal axis) because the vertical
    damping must stay light for the stance rebound while the horizontal
    dampers, acting below the trunk, are what calm its attitude.
    """
    kp_z, kd_z = tune_vertical_gains(dt_support, geom.mass / 2.0, zeta)
    kp_xy = xy_scale * kp_z
    if kd_xy_scale is None:
        kd_xy = xy_scale * kd_z
    else:
        kd_xy = kd_xy_scale * 2.0 * math.sqrt(kp_xy * geom.mass / 2.0)
    return VirtualGains(kp=(kp_xy, kp_xy, kp_z), kd=(kd_xy, kd_xy, kd_z))


def gravity_comp(n_support: int, geom: RobotGeometry) -> float:
    """Vertical weight share per support foot (N, magnitude); 0 in flight."""
    if n_support <= 0:
        return 0.0
    return geom.weight / n_support


def map_to_torques(J: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Joint torques realizing foot force f: tau = J^T f."""
    return np.asarray(J).T @ np.asarray(f)


def distribute_weight(positions_xy, total: float, tau_x: float = 0.0,
                      tau_y: float = 0.0) -> np.ndarray:
    """Split the weight share over the support feet, biased to produce the
    requested trunk moments.

    The equal split only constrains the sum; asymmetric loading of the
    pair is the free direction, used here to realize roll/pitch moments
    (tau_x about +x, tau_y about +y) through the vertical forces at the
    given body-frame foot positions. Per-foot forces stay non-negative
    and always sum to `total`.
    """
    pos = np.asarray(positions_xy, dtype=float).reshape(-1, 2)
    n = len(pos)
    if n == 0 or total <= 0.0:
        return np.zeros(n)
    base = np.full(n, total / n)
    if n > 1 and (tau_x != 0.0 or tau_y != 0.0):
        # Vertical force dF at (x, y) adds (y*dF, -x*dF) to the trunk moment.
        A = np.vstack([np.ones(n), pos[:, 1], -pos[:, 0]])
        b = np.array([0.0, tau_x, tau_y])
        delta, *_ = np.linalg.lstsq(A, b, rcond=None)
        base = base + delta
        base = np.clip(base, 0.0, None)
        s = base.sum()
        base = base * (total / s) if s > 0 else np.full(n, total / n)
    return base


@dataclass
class FootCommand:
    """Per-leg controller output for one tick.

    p_des/v_des are hip-frame tracking targets; f_vir the virtual-model
    force, f_comp the gravity-compensation magnitude, f_d the assembled
    leg-on-foot force, and tau its joint-torque image.
    """

    leg: int
    phase: int
    p_des: np.ndarray
    v_des: np.ndarray
    f_vir: np.ndarray = field(default_factory=lambda: np.zeros(3))
    f_comp: float = 0.0
    f_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tau: np.ndarray = field(default_factory=lambda: np.zeros(3))
    support: bool = False
    clamped: bool = False
    frozen_z: bool = False


def assemble_command(cmd: FootCommand, J: np.ndarray,
                     tau_max: float | None = None) -> FootCommand:
    """Fill in f_d and tau from f_vir/f_comp; optionally clamp torques.

    The weight share enters the leg-on-foot force pointing down (the
    reaction props the trunk up). When a torque clamp engages, the force
    scales with it so command and torque stay consistent.
    """
    f_d = cmd.f_vir + np.array([0.0, 0.0, -cmd.f_comp])
    tau = map_to_torques(J, f_d)
    if tau_max is not None:
        peak = float(np.max(np.abs(tau)))
        if peak > tau_max > 0.0:
            scale = tau_max / peak
            f_d = f_d * scale
            tau = tau * scale
    cmd.f_d = f_d
    cmd.tau = tau
    return cmd
