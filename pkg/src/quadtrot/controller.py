"""Per-tick closed-loop control: gait clock queries, trajectory evaluation,
stabilizing corrections, and compliance force assembly for all four legs.

Plans are latched per diagonal pair at each of its cycle origins, so a
speed ramp changes the timeline only between cycles and every cycle is
internally consistent. Stance x/y anchors latch from measured foot
positions at the scheduled support entry; swing curves latch at support
exit from the last commanded point, which keeps commands continuous even
while the posture offsets are active.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import compliance as cp
from . import gait
from . import stabilizer as sb
from . import trajectory as tj
from .geometry import (LEGS, JointAngles, Leg, RobotGeometry,
                       clamp_to_workspace, hip_origin, jacobian)
from .simulator import SensorSample


@dataclass(frozen=True)
class ControllerConfig:
    posture: sb.PostureGains = sb.PostureGains()
    raibert: tj.RaibertGains = tj.RaibertGains()
    k_com: float = 0.1
    cutoff_hz: float = 10.0
    stabilizer_on: bool = True
    compliance_on: bool = True
    zeta: float = 0.1
    kp_xy_scale: float = 0.5
    kd_xy_scale: float | None = None  # damping ratio of the horizontal axes
    tau_max: float | None = None
    workspace_margin: float = 1.5e-3
    dt: float = 1e-3
    # Swing-down commands ramp this far below the landing height so touch
    # is decisive rather than grazing; the early-touchdown latch freezes
    # the command at contact and stance blending removes the offset.
    touchdown_overdrive: float = 3e-3
    # Attitude rates fed to the posture loop are low-passed; support
    # exchanges put large spikes on the raw rate signal that would
    # otherwise jerk the foot offsets.
    posture_rate_cutoff_hz: float = 15.0
    # Attitude PD realized through the asymmetric split of the weight
    # share across the support feet (N*m/rad, N*m*s/rad). A diagonal pair
    # cannot moment about its own support line, so this channel mainly
    # helps with three or more feet down; off by default.
    kp_dist: float = 0.0
    kd_dist: float = 0.0
    # Compensate swing-foot height commands for measured trunk attitude
    # so the pair lands in sync even when the trunk is tilted (the plan
    # assumes a level trunk).
    swing_level_comp: bool = True


@dataclass
class GroupPlan:
    """Cycle-latched plan shared by one diagonal pair."""

    params: gait.GaitParams
    timeline: gait.PhaseTimeline
    keyframes: tj.ZKeyframes
    zspline: tj.HermiteSpline
    gains: cp.VirtualGains
    prev_tau: float = -1.0


@dataclass
class LegState:
    px0: float = 0.0          # stance sweep origin, hip-frame x
    py0: float = 0.0          # stance sweep origin, lateral offset from neutral
    stance_t0: float | None = None  # absolute time the sweep started
    swing_x0: float = 0.0     # swing start point/velocity (latched at liftoff)
    swing_vx0: float = 0.0
    swing_y0: float = 0.0
    swing_vy0: float = 0.0
    adjust: sb.AdjustState = field(default_factory=sb.AdjustState)
    early: sb.EarlyTouchdownLatch = field(default_factory=sb.EarlyTouchdownLatch)
    prev_phase: gait.LegPhase = gait.LegPhase.SUPPORT
    prev_contact: bool = False
    last_x: float = 0.0
    last_vx: float = 0.0
    last_y: float = 0.0       # relative to neutral
    last_vy: float = 0.0
    last_z: float | None = None
    z_blend: float = 0.0      # stance-entry offset, decayed over early stance
    swing_clamped: bool = False


class TrotController:
    """Generates FootCommands from sensor samples and speed/heading commands."""

    def __init__(self, geom: RobotGeometry, base: gait.GaitParams,
                 cfg: ControllerConfig | None = None):
        self.geom = geom
        self.base = base
        self.cfg = cfg or ControllerConfig()
        self.estimator = sb.VelocityEstimator(self.cfg.cutoff_hz)
        self.touchdowns = sb.TouchdownLog()
        self.hips = np.array([hip_origin(leg, geom) for leg in LEGS])
        self._rate_filt = np.zeros(2)
        self._rate_tau = 1.0 / (2.0 * np.pi * self.cfg.posture_rate_cutoff_hz)
        self.groups: dict[str, GroupPlan] = {
            "L": self._make_plan(base.vx),
            "R": self._make_plan(base.vx),
        }
        self.legs: dict[Leg, LegState] = {}
        for leg in LEGS:
            st = LegState()
            st.px0 = self._steady_px0(self.groups[leg.group])
            st.py0 = 0.0
            st.last_x = st.px0
            self._latch_swing(leg, st, self.groups[leg.group],
                              from_x=None, from_y=None)
            self.legs[leg] = st

    # -- plan management --

    def _make_plan(self, vx: float) -> GroupPlan:
        params = replace(self.base, vx=vx)
        timeline = gait.derive_timeline(params)
        keyframes = tj.synth_z_keyframes(params, timeline)
        gains = cp.stance_gains(timeline.durations[0], self.geom,
                                self.cfg.zeta, self.cfg.kp_xy_scale,
                                self.cfg.kd_xy_scale)
        return GroupPlan(params=params, timeline=timeline, keyframes=keyframes,
                         zspline=keyframes.spline(), gains=gains)

    def _steady_px0(self, plan: GroupPlan) -> float:
        return (self.cfg.raibert.neutral_factor * plan.params.vx
                * plan.timeline.durations[0])

    def neutral_y(self, leg: Leg) -> float:
        return leg.side * self.geom.a1

    def _swing_limit(self, plan: GroupPlan) -> float:
        reach = self.geom.a2 + self.geom.a3 - self.cfg.workspace_margin
        zs = abs(plan.params.zs)
        return float(np.sqrt(max(1e-6, reach * reach - zs * zs)))

    def _latch_swing(self, leg: Leg, st: LegState, plan: GroupPlan,
                     from_x: float | None, from_y: float | None) -> None:
        t_stance = plan.timeline.durations[0]
        st.swing_x0 = (from_x if from_x is not None
                       else self._steady_px0(plan) - plan.params.vx * t_stance)
        st.swing_vx0 = -plan.params.vx
        st.swing_y0 = from_y if from_y is not None else 0.0
        st.swing_vy0 = 0.0

    def _swing_segments(self, st: LegState, plan: GroupPlan,
                        v_est: tuple[float, float], correction: float
                        ) -> tuple[tj.HermiteSegment, tj.HermiteSegment]:
        """Swing curves re-aimed every tick at the current landing target."""
        timeline = plan.timeline
        limit = self._swing_limit(plan)
        _, seg_x, cx = tj.plan_swing_x(
            st.swing_x0, v_est[0], plan.params.vx, timeline, self.cfg.raibert,
            correction=correction, limit=limit)
        seg_x = tj.HermiteSegment(seg_x.t0, seg_x.t1, st.swing_x0, seg_x.p1,
                                  st.swing_vx0, seg_x.v1)
        _, seg_y, cy = tj.plan_swing_x(
            st.swing_y0, v_est[1], 0.0, timeline, self.cfg.raibert,
            correction=0.0, limit=limit)
        seg_y = tj.HermiteSegment(seg_y.t0, seg_y.t1, st.swing_y0, seg_y.p1,
                                  st.swing_vy0, seg_y.v1)
        st.swing_clamped = cx or cy
        return seg_x, seg_y

    # -- main tick --

    def tick(self, sensors: SensorSample, vx_cmd: float,
             wz_cmd: float = 0.0) -> list[cp.FootCommand]:
        t = sensors.t
        dt = self.cfg.dt
        contacts = sensors.contact
        n_contact = int(np.count_nonzero(contacts))

        # Translate each stance foot's velocity to the body origin before
        # averaging: the raw foot average is the velocity of a ground-level
        # point and misses the trunk-tipping rate that foot placement must
        # capture.
        support_vels = []
        for i in range(4):
            if contacts[i]:
                p_body = self.hips[i] + sensors.foot_pos_hip[i]
                v = sensors.foot_vel_hip[i] + np.cross(sensors.omega, p_body)
                support_vels.append(v[:2])
        est = self.estimator.update(support_vels, dt)

        for name, plan in self.groups.items():
            tau = gait.cycle_time(plan.timeline, t, name)
            if plan.prev_tau >= 0.0 and tau < plan.prev_tau - plan.timeline.T / 2:
                new = self._make_plan(vx_cmd)
                new.prev_tau = tau
                self.groups[name] = new
            else:
                plan.prev_tau = tau


        alpha = dt / (self._rate_tau + dt)
        self._rate_filt += alpha * (sensors.rpy_rate[:2] - self._rate_filt)
        if self.cfg.stabilizer_on and n_contact > 0:
            sp = sb.PostureSetpoint(roll=sensors.rpy[0], pitch=sensors.rpy[1],
                                    roll_rate=self._rate_filt[0],
                                    pitch_rate=self._rate_filt[1])
            adj_ax, adj_ay = sb.posture_accel(sp, self.cfg.posture)
        else:
            adj_ax = adj_ay = 0.0
        correction = (sb.com_correction(self.touchdowns, self.cfg.k_com)
                      if self.cfg.stabilizer_on else 0.0)

        # Weight share over the feet on the ground, asymmetrically split to
        # realize a righting moment (the equal split only fixes the sum).
        comps = np.zeros(4)
        if self.cfg.compliance_on and n_contact > 0:
            if self.cfg.stabilizer_on:
                tau_x = (-self.cfg.kp_dist * sensors.rpy[0]
                         - self.cfg.kd_dist * self._rate_filt[0])
                tau_y = (-self.cfg.kp_dist * sensors.rpy[1]
                         - self.cfg.kd_dist * self._rate_filt[1])
            else:
                tau_x = tau_y = 0.0
            idx = [i for i in range(4) if contacts[i]]
            pos_xy = [(self.hips[i] + sensors.foot_pos_hip[i])[:2] for i in idx]
            share = cp.distribute_weight(pos_xy, self.geom.weight, tau_x, tau_y)
            for slot, i in enumerate(idx):
                comps[i] = share[slot]

        commands: list[cp.FootCommand] = []
        for i, leg in enumerate(LEGS):
            st = self.legs[leg]
            plan = self.groups[leg.group]
            timeline = plan.timeline
            tau = gait.cycle_time(timeline, t, leg.group)
            phase, t_local = gait.phase_at(timeline, t, leg.group)
            in_contact = bool(contacts[i])
            new_contact = in_contact and not st.prev_contact

            if new_contact:
                self.touchdowns.record(
                    leg, sensors.foot_pos_hip[i, 1] - self.neutral_y(leg))
                # A landing during swing-down starts the stance sweep right
                # away (from measured foot position), so the anchored foot
                # rides with the trunk instead of chasing the swing curve.
                if phase == gait.LegPhase.SWING_DOWN:
                    st.px0 = float(sensors.foot_pos_hip[i, 0])
                    st.py0 = (float(sensors.foot_pos_hip[i, 1])
                              - self.neutral_y(leg))
                    st.stance_t0 = t

            if phase == gait.LegPhase.SUPPORT and st.prev_phase != gait.LegPhase.SUPPORT:
                if st.stance_t0 is None:
                    st.px0 = float(sensors.foot_pos_hip[i, 0])
                    st.py0 = (float(sensors.foot_pos_hip[i, 1])
                              - self.neutral_y(leg))
                    st.stance_t0 = t
                st.adjust.reset()
                # Resume the vertical plan from the last commanded height
                # (covers early-touchdown freezes); the offset decays over
                # the first part of stance so liftoff stays on plan.
                st.z_blend = (0.0 if st.last_z is None
                              else st.last_z - plan.params.zs)
            if phase != gait.LegPhase.SUPPORT and st.prev_phase == gait.LegPhase.SUPPORT:
                st.stance_t0 = None
                self._latch_swing(leg, st, plan, from_x=st.last_x,
                                  from_y=st.last_y)

            z, vz, _ = plan.zspline.eval(tau)
            if phase == gait.LegPhase.SWING_DOWN:
                d4 = timeline.durations[3]
                z -= self.cfg.touchdown_overdrive * (t_local / d4)
                vz -= self.cfg.touchdown_overdrive / d4
            if (self.cfg.swing_level_comp and self.cfg.stabilizer_on
                    and phase in (gait.LegPhase.SWING_UP, gait.LegPhase.SWING_DOWN)):
                # Small-angle world-height correction: the plan assumes a
                # level trunk, so a tilt eats the clearance of the dipped
                # side's foot mid-swing. Faded back out before touchdown so
                # the landing geometry stays the planned one.
                if phase == gait.LegPhase.SWING_UP:
                    ramp = t_local / max(timeline.durations[2], 1e-9)
                else:
                    ramp = 1.0 - t_local / max(timeline.durations[3], 1e-9)
                hx, hy = self.hips[i][0], self.hips[i][1]
                z += ramp * (sensors.rpy[1] * hx - sensors.rpy[0] * hy)
            z, vz = st.early.update(phase, in_contact, new_contact, z, vz)
            if phase == gait.LegPhase.SUPPORT and st.z_blend != 0.0:
                span = 0.4 * timeline.durations[0]
                w = 1.0 - t_local / span
                if w > 0.0:
                    z += st.z_blend * w
                    vz -= st.z_blend / span
                else:
                    st.z_blend = 0.0
            st.last_z = z

            early_stance = (phase == gait.LegPhase.SWING_DOWN and in_contact
                            and st.stance_t0 is not None)
            if phase == gait.LegPhase.SWING_DOWN and not in_contact:
                st.stance_t0 = None
            if phase == gait.LegPhase.SUPPORT or early_stance:
                sweep_t = t - (st.stance_t0 if st.stance_t0 is not None else t)
                x = tj.plan_support_x(st.px0, plan.params.vx, sweep_t)
                vx_d = -plan.params.vx
                y_rel = st.py0
                vy_d = 0.0
                if (phase == gait.LegPhase.SUPPORT and self.cfg.stabilizer_on
                        and n_contact > 0):
                    # Position-only modification: the leg damper then resists
                    # the induced motion, which keeps the loop passive.
                    dx, dy = sb.integrate_adjust(st.adjust, adj_ax, adj_ay, dt,
                                                 self.cfg.posture.p_adj_max)
                    x += dx
                    y_rel += dy
                t_phase = t_local if phase == gait.LegPhase.SUPPORT else 0.0
            else:
                seg_x, seg_y = self._swing_segments(st, plan, (est.vx, est.vy),
                                                    correction)
                x, vx_d, _ = seg_x.eval(tau)
                y_rel, vy_d, _ = seg_y.eval(tau)
                t_phase = tau - timeline.durations[0]

            st.last_x, st.last_vx = x, vx_d
            st.last_y, st.last_vy = y_rel, vy_d

            p_hip = np.array([x, self.neutral_y(leg) + y_rel, z])
            v_hip = np.array([vx_d, vy_d, vz])

            if wz_cmd != 0.0:
                hip = np.array([*self.hip_xy(leg), 0.0])
                p_body, v_body = tj.apply_heading_with_velocity(
                    hip + p_hip, v_hip, wz_cmd, t_phase,
                    phase == gait.LegPhase.SUPPORT)
                p_hip = p_body - hip
                v_hip = v_body

            p_hip, clamped = clamp_to_workspace(leg, p_hip, self.geom,
                                                self.cfg.workspace_margin)

            cmd = cp.FootCommand(
                leg=int(leg), phase=int(phase), p_des=p_hip, v_des=v_hip,
                support=(phase == gait.LegPhase.SUPPORT),
                clamped=clamped or st.swing_clamped,
                frozen_z=st.early.active)
            if self.cfg.compliance_on:
                cmd.f_vir = cp.virtual_force(p_hip, v_hip,
                                             sensors.foot_pos_hip[i],
                                             sensors.foot_vel_hip[i], plan.gains)
                cmd.f_comp = float(comps[i])
            q = JointAngles(*sensors.q[i])
            cp.assemble_command(cmd, jacobian(leg, q, self.geom),
                                self.cfg.tau_max)
            commands.append(cmd)

            st.prev_phase = phase
            st.prev_contact = in_contact
        return commands

    def hip_xy(self, leg: Leg) -> tuple[float, float]:
        x = self.geom.L / 2 if leg.front else -self.geom.L / 2
        w = self.geom.W1 / 2 if leg.front else self.geom.W2 / 2
        return x, leg.side * w
