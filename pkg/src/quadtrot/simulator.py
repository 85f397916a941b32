"""Fixed-step rigid-trunk dynamics with massless-leg force transmission.

The trunk is a single rigid body; legs carry no inertia. Two plant modes:

massless-leg (default)
    A foot that reaches the ground anchors at its touchdown point (no
    slip). The leg transmits the commanded foot force to the trunk as the
    ground reaction, clamped to be unilateral and inside the friction
    cone; pulling up or overextending the leg breaks contact. Airborne
    feet track their commanded positions through a first-order lag.

kinematic-foot
    Feet rigidly follow commands (position control); ground reaction
    comes from a penalty model on penetration depth/rate with regularized
    Coulomb friction. This reproduces a position-controlled robot with no
    force feedback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compliance import FootCommand
from .geometry import LEGS, RobotGeometry, clamp_to_workspace, hip_origin, ik_leg


class SimulationDiverged(RuntimeError):
    def __init__(self, t: float, detail: str):
        self.t = t
        super().__init__(f"simulation diverged at t={t:.4f}s: {detail}")


# --- quaternion helpers (wxyz, body -> world) ---------------------------------

def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = float(np.linalg.norm(q))
    if n < 1e-12:
        return np.array([1.0, 0.0, 0.0, 0.0])
    q = q / n
    return -q if q[0] < 0 else q


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = quat_normalize(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_omega(omega_body: np.ndarray, dt: float) -> np.ndarray:
    w = np.asarray(omega_body, dtype=float)
    angle = float(np.linalg.norm(w)) * dt
    if angle < 1e-12:
        return np.array([1.0, 0.0, 0.0, 0.0])
    axis = w / np.linalg.norm(w)
    half = 0.5 * angle
    return np.array([math.cos(half), *(math.sin(half) * axis)])


def quat_from_rpy(roll: float, pitch: float, yaw: float) -> np.ndarray:
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    return quat_normalize(np.array([
        cy * cp * cr + sy * sp * sr,
        cy * cp * sr - sy * sp * cr,
        cy * sp * cr + sy * cp * sr,
        sy * cp * cr - cy * sp * sr,
    ]))


def matrix_to_rpy(R: np.ndarray) -> np.ndarray:
    """Roll, pitch, yaw of R = Rz(yaw) Ry(pitch) Rx(roll)."""
    roll = math.atan2(R[2, 1], R[2, 2])
    pitch = math.atan2(-R[2, 0], math.sqrt(max(1e-15, R[2, 1] ** 2 + R[2, 2] ** 2)))
    yaw = math.atan2(R[1, 0], R[0, 0])
    return np.array([roll, pitch, yaw])


def rpy_rates(rpy: np.ndarray, omega_body: np.ndarray) -> np.ndarray:
    """Euler-angle rates from the body angular velocity."""
    roll, pitch = rpy[0], rpy[1]
    sr, cr = math.sin(roll), math.cos(roll)
    ct = math.cos(pitch)
    ct = math.copysign(max(abs(ct), 1e-6), ct if ct != 0 else 1.0)
    tt = math.tan(pitch)
    wx, wy, wz = omega_body
    return np.array([
        wx + sr * tt * wy + cr * tt * wz,
        cr * wy - sr * wz,
        (sr * wy + cr * wz) / ct,
    ])


# --- configuration -------------------------------------------------------------

@dataclass(frozen=True)
class ContactParams:
    kn: float = 5000.0   # normal stiffness (N/m)
    dn: float = 50.0     # normal damping (N*s/m)
    mu: float = 0.8      # friction coefficient
    v_reg: float = 0.01  # tangential regularization velocity (m/s)

    def __post_init__(self) -> None:
        if self.kn <= 0 or self.dn < 0 or self.mu < 0 or self.v_reg <= 0:
            raise ValueError("invalid contact parameters")


@dataclass(frozen=True)
class Disturbance:
    """Impulse delivered as a constant force over a finite window."""

    impulse: tuple[float, float, float]  # kg*m/s, world frame
    start: float
    duration: float
    point_body: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError("disturbance duration must be > 0")

    def force_at(self, t: float) -> np.ndarray:
        if self.start <= t < self.start + self.duration:
            return np.asarray(self.impulse) / self.duration
        return np.zeros(3)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    duration: float = 10.0
    mode: str = "massless-leg"  # or "kinematic-foot"
    noise_sigma: float = 0.0
    seed: int = 0
    inertia: tuple[float, float, float] | None = None  # diagonal, kg*m^2
    foot_lag: float = 5e-3      # swing tracking time constant (s)
    trunk_height_m: float = 0.06  # cuboid height used for the default inertia

    def __post_init__(self) -> None:
        if not (0.0 < self.dt <= 5e-3):
            raise ValueError("dt must be in (0, 5e-3]")
        if self.mode not in ("massless-leg", "kinematic-foot"):
            raise ValueError(f"unknown sim mode {self.mode!r}")


def default_inertia(geom: RobotGeometry, height: float = 0.06) -> np.ndarray:
    """Uniform-density cuboid L x W1 x height at total mass."""
    m = geom.mass
    return np.array([
        m * (geom.W1 ** 2 + height ** 2) / 12.0,
        m * (geom.L ** 2 + height ** 2) / 12.0,
        m * (geom.L ** 2 + geom.W1 ** 2) / 12.0,
    ])


# --- state ---------------------------------------------------------------------

@dataclass
class WorldState:
    t: float
    pos: np.ndarray          # trunk position, world (3,)
    quat: np.ndarray         # orientation, wxyz, body -> world
    vel: np.ndarray          # trunk velocity, world (3,)
    omega: np.ndarray        # angular velocity, body frame (3,)
    foot_pos_w: np.ndarray   # (4, 3)
    foot_vel_w: np.ndarray   # (4, 3)
    contact: np.ndarray      # (4,) bool
    anchor: np.ndarray       # (4, 3) touchdown points (valid while contact)
    f_ground: np.ndarray     # (4, 3) ground reaction on the trunk, world

    def copy(self) -> "WorldState":
        return WorldState(
            t=self.t, pos=self.pos.copy(), quat=self.quat.copy(),
            vel=self.vel.copy(), omega=self.omega.copy(),
            foot_pos_w=self.foot_pos_w.copy(), foot_vel_w=self.foot_vel_w.copy(),
            contact=self.contact.copy(), anchor=self.anchor.copy(),
            f_ground=self.f_ground.copy())


@dataclass
class SensorSample:
    """Per-tick readout consumed by the controller and telemetry."""

    t: float
    rpy: np.ndarray
    rpy_rate: np.ndarray
    omega: np.ndarray
    trunk_pos: np.ndarray
    trunk_vel: np.ndarray         # world frame, ground truth
    trunk_vel_body: np.ndarray
    contact: np.ndarray
    q: np.ndarray                 # (4, 3) joint angles from leg kinematics
    foot_pos_hip: np.ndarray      # (4, 3)
    foot_vel_hip: np.ndarray      # (4, 3)


def contact_force(delta: float, delta_rate: float, v_t: np.ndarray,
                  params: ContactParams) -> np.ndarray:
    """Penalty ground reaction [Ftx, Fty, Fn] for penetration delta >= 0."""
    fn = max(0.0, params.kn * delta + params.dn * delta_rate)
    v_t = np.asarray(v_t, dtype=float)
    speed = float(np.hypot(v_t[0], v_t[1]))
    if fn == 0.0 or speed == 0.0:
        return np.array([0.0, 0.0, fn])
    scale = min(1.0, speed / params.v_reg) / speed
    ft = -params.mu * fn * v_t * scale
    return np.array([ft[0], ft[1], fn])


class Simulator:
    """Steps the trunk + feet plant under per-leg foot commands."""

    REACH_SLACK = 1e-3   # extra leg extension allowed before contact breaks (m)
    POS_LIMIT = 100.0
    VEL_LIMIT = 100.0

    def __init__(self, geom: RobotGeometry, contact: ContactParams | None = None,
                 config: SimConfig | None = None):
        self.geom = geom
        self.contact_params = contact or ContactParams()
        self.config = config or SimConfig()
        inertia = (np.asarray(self.config.inertia, dtype=float)
                   if self.config.inertia is not None
                   else default_inertia(geom, self.config.trunk_height_m))
        if np.any(inertia <= 0):
            raise ValueError("inertia diagonal must be positive")
        self.inertia = inertia
        self.hips = np.array([hip_origin(leg, geom) for leg in LEGS])
        self.rng = np.random.default_rng(self.config.seed)
        self.disturbances: list[Disturbance] = []
        self.gravity_on = True

    # -- construction helpers --

    def standing_state(self, height: float) -> WorldState:
        """All four feet anchored at their neutral points, trunk level."""
        feet = np.zeros((4, 3))
        for i, leg in enumerate(LEGS):
            hip = self.hips[i]
            feet[i] = [hip[0], hip[1] + leg.side * self.geom.a1, 0.0]
        return WorldState(
            t=0.0,
            pos=np.array([0.0, 0.0, height]),
            quat=np.array([1.0, 0.0, 0.0, 0.0]),
            vel=np.zeros(3), omega=np.zeros(3),
            foot_pos_w=feet.copy(), foot_vel_w=np.zeros((4, 3)),
            contact=np.ones(4, dtype=bool), anchor=feet.copy(),
            f_ground=np.zeros((4, 3)))

    # -- core step --

    def step(self, world: WorldState, commands: list[FootCommand]) -> WorldState:
        dt = self.config.dt
        R = quat_to_matrix(world.quat)
        force = np.zeros(3)
        torque_w = np.zeros(3)
        if self.gravity_on:
            force[2] -= self.geom.weight
        for d in self.disturbances:
            f = d.force_at(world.t)
            if np.any(f):
                force += f
                arm = R @ np.asarray(d.point_body)
                torque_w += np.cross(arm, f)

        world.f_ground[:] = 0.0
        if self.config.mode == "massless-leg":
            self._stance_forces(world, commands, R, force_acc=force,
                                torque_acc=torque_w)
        else:
            self._penalty_forces(world, force_acc=force, torque_acc=torque_w)

        # Semi-implicit Euler on the trunk 6-DOF state.
        world.vel += dt * force / self.geom.mass
        world.pos += dt * world.vel
        tau_b = R.T @ torque_w
        Iw = self.inertia * world.omega
        world.omega += dt * (tau_b - np.cross(world.omega, Iw)) / self.inertia
        if not np.all(np.isfinite(world.omega)) or np.max(np.abs(world.omega)) > 1e4:
            raise SimulationDiverged(world.t, "angular velocity diverged")
        world.quat = quat_normalize(
            quat_mul(world.quat, quat_from_omega(world.omega, dt)))
        world.t += dt

        self._update_feet(world, commands)
        self._check_sanity(world)
        return world

    def _stance_forces(self, world: WorldState, commands, R, force_acc,
                       torque_acc) -> None:
        mu = self.contact_params.mu
        max_ext = self.geom.max_reach + self.REACH_SLACK
        for i, leg in enumerate(LEGS):
            if not world.contact[i]:
                continue
            hip_w = world.pos + R @ self.hips[i]
            if np.linalg.norm(world.anchor[i] - hip_w) > max_ext:
                world.contact[i] = False
                continue
            fg_w = R @ (-commands[i].f_d)  # ground reaction through the leg
            if fg_w[2] <= 0.0:
                world.contact[i] = False
                continue
            t_norm = math.hypot(fg_w[0], fg_w[1])
            limit = mu * fg_w[2]
            if t_norm > limit:
                fg_w[0] *= limit / t_norm
                fg_w[1] *= limit / t_norm
            world.f_ground[i] = fg_w
            force_acc += fg_w
            torque_acc += np.cross(world.anchor[i] - world.pos, fg_w)

    def _penalty_forces(self, world: WorldState, force_acc, torque_acc) -> None:
        for i in range(4):
            z = world.foot_pos_w[i, 2]
            if z > 0.0:
                continue
            fg = contact_force(-z, -world.foot_vel_w[i, 2],
                               world.foot_vel_w[i, :2], self.contact_params)
            world.f_ground[i] = fg
            force_acc += fg
            torque_acc += np.cross(world.foot_pos_w[i] - world.pos, fg)

    def _update_feet(self, world: WorldState, commands) -> None:
        dt = self.config.dt
        lag = self.config.foot_lag
        R = quat_to_matrix(world.quat)
        anchored_mode = self.config.mode == "massless-leg"
        for i in range(4):
            if anchored_mode and world.contact[i]:
                world.foot_pos_w[i] = world.anchor[i]
                world.foot_vel_w[i] = 0.0
                continue
            target = world.pos + R @ (self.hips[i] + commands[i].p_des)
            v = (target - world.foot_pos_w[i]) / lag
            world.foot_vel_w[i] = v
            world.foot_pos_w[i] += dt * v
            if anchored_mode:
                if world.foot_pos_w[i, 2] <= 0.0:
                    world.anchor[i] = world.foot_pos_w[i].copy()
                    world.anchor[i, 2] = 0.0
                    world.foot_pos_w[i] = world.anchor[i]
                    world.foot_vel_w[i] = 0.0
                    world.contact[i] = True
            else:
                world.contact[i] = world.foot_pos_w[i, 2] <= 0.0

    def _check_sanity(self, world: WorldState) -> None:
        arrays = (world.pos, world.vel, world.omega, world.quat)
        if any(not np.all(np.isfinite(a)) for a in arrays):
            raise SimulationDiverged(world.t, "non-finite trunk state")
        if np.max(np.abs(world.pos)) > self.POS_LIMIT:
            raise SimulationDiverged(world.t, f"|pos| > {self.POS_LIMIT}")
        if np.max(np.abs(world.vel)) > self.VEL_LIMIT:
            raise SimulationDiverged(world.t, f"|vel| > {self.VEL_LIMIT}")

    # -- sensing --

    def foot_states_hip(self, world: WorldState) -> tuple[np.ndarray, np.ndarray]:
        """Actual foot positions and velocities in each leg's hip frame."""
        R = quat_to_matrix(world.quat)
        pos = np.zeros((4, 3))
        vel = np.zeros((4, 3))
        for i in range(4):
            rel_w = world.foot_pos_w[i] - world.pos
            p_body = R.T @ rel_w
            pos[i] = p_body - self.hips[i]
            vel[i] = (R.T @ (world.foot_vel_w[i] - world.vel)
                      - np.cross(world.omega, p_body))
        return pos, vel

    def readout(self, world: WorldState) -> SensorSample:
        R = quat_to_matrix(world.quat)
        rpy = matrix_to_rpy(R)
        rates = rpy_rates(rpy, world.omega)
        if self.config.noise_sigma > 0.0:
            rpy = rpy + self.rng.normal(0.0, self.config.noise_sigma, 3)
            rates = rates + self.rng.normal(0.0, self.config.noise_sigma, 3)
        foot_pos, foot_vel = self.foot_states_hip(world)
        q = np.zeros((4, 3))
        for i, leg in enumerate(LEGS):
            p, _ = clamp_to_workspace(leg, foot_pos[i], self.geom, margin=1e-9)
            ang = ik_leg(leg, p, self.geom)
            q[i] = (ang.q1, ang.q2, ang.q3)
        return SensorSample(
            t=world.t, rpy=rpy, rpy_rate=rates, omega=world.omega.copy(),
            trunk_pos=world.pos.copy(), trunk_vel=world.vel.copy(),
            trunk_vel_body=R.T @ world.vel, contact=world.contact.copy(),
            q=q, foot_pos_hip=foot_pos, foot_vel_hip=foot_vel)
