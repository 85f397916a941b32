"""Scenario configuration, closed-loop orchestration, telemetry, metrics.

Config files are line-oriented `section.key = value` pairs ('#' starts a
comment). Unknown keys are rejected. Telemetry is CSV with '#'-prefixed
header lines carrying the config hash and trunk inertia, one row per
control tick. Metrics are computed from telemetry alone.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .controller import ControllerConfig, TrotController
from .gait import GaitParams, GaitValidationError, InfeasibleGait, derive_timeline
from .geometry import LEGS, RobotGeometry, hip_origin
from .simulator import (ContactParams, Disturbance, SimConfig,
                        SimulationDiverged, Simulator, default_inertia)
from .stabilizer import PostureGains
from .trajectory import PlannedCycle, RaibertGains


def scenario_path(name: str) -> str:
    """Filesystem path of a bundled scenario file, e.g. 'running.ini'."""
    from importlib import resources
    ref = resources.files("quadtrot") / "scenarios" / name
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return str(ref)


class ParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class ValidationError(ValueError):
    pass


class InsufficientData(ValueError):
    pass


Profile = tuple[tuple[float, float], ...]


def profile_value(profile: Profile, t: float) -> float:
    """Piecewise-linear lookup, clamped to the end values."""
    if t <= profile[0][0]:
        return profile[0][1]
    for (t0, v0), (t1, v1) in zip(profile, profile[1:]):
        if t <= t1:
            if t1 <= t0:
                return v1
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    return profile[-1][1]


@dataclass
class Scenario:
    gait: GaitParams = GaitParams()
    geometry: RobotGeometry = RobotGeometry()
    controller: ControllerConfig = ControllerConfig()
    contact: ContactParams = ContactParams()
    sim: SimConfig = SimConfig()
    profile_vx: Profile | None = None       # default: constant gait.vx
    profile_wz: Profile = ((0.0, 0.0),)
    disturbances: tuple[Disturbance, ...] = ()
    settle_band: float = 0.03

    def vx_profile(self) -> Profile:
        return self.profile_vx or ((0.0, self.gait.vx),)

    def config_hash(self) -> str:
        blob = repr((self.gait, self.geometry, self.controller, self.contact,
                     self.sim, self.profile_vx, self.profile_wz,
                     self.disturbances, self.settle_band))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


# --- config file parsing --------------------------------------------------------

def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_profile(raw: str) -> Profile:
    toks = raw.replace(",", " ").split()
    pairs = []
    for tok in toks:
        if ":" in tok:
            a, b = tok.split(":", 1)
            pairs.append((float(a), float(b)))
        else:
            pairs.append((0.0, float(tok)))
    if not pairs:
        raise ValueError("empty profile")
    times = [p[0] for p in pairs]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("profile times must be non-decreasing")
    return tuple(pairs)


_FLOAT_KEYS = {
    "gait.f": ("gait", "f"), "gait.vx": ("gait", "vx"),
    "gait.zs": ("gait", "zs"), "gait.hwa": ("gait", "hwa"),
    "gait.hsd": ("gait", "hsd"), "gait.c1": ("gait", "c1"),
    "gait.c2": ("gait", "c2"), "gait.c3": ("gait", "c3"),
    "gait.c4": ("gait", "c4"), "gait.c5": ("gait", "c5"),
    "geometry.L": ("geometry", "L"), "geometry.W1": ("geometry", "W1"),
    "geometry.W2": ("geometry", "W2"), "geometry.a1": ("geometry", "a1"),
    "geometry.a2": ("geometry", "a2"), "geometry.a3": ("geometry", "a3"),
    "robot.mass": ("geometry", "mass"), "world.gravity": ("geometry", "g"),
    "stabilizer.kp_pitch": ("posture", "kp_pitch"),
    "stabilizer.kd_pitch": ("posture", "kd_pitch"),
    "stabilizer.kp_roll": ("posture", "kp_roll"),
    "stabilizer.kd_roll": ("posture", "kd_roll"),
    "stabilizer.p_adj_max": ("posture", "p_adj_max"),
    "stabilizer.k_comp": ("raibert", "k_comp"),
    "stabilizer.lambda": ("raibert", "neutral_factor"),
    "stabilizer.k_com": ("controller", "k_com"),
    "stabilizer.cutoff_hz": ("controller", "cutoff_hz"),
    "stabilizer.rate_cutoff_hz": ("controller", "posture_rate_cutoff_hz"),
    "stabilizer.overdrive": ("controller", "touchdown_overdrive"),
    "stabilizer.kp_dist": ("controller", "kp_dist"),
    "stabilizer.kd_dist": ("controller", "kd_dist"),
    "compliance.zeta": ("controller", "zeta"),
    "compliance.kp_xy_scale": ("controller", "kp_xy_scale"),
    "compliance.kd_xy_scale": ("controller", "kd_xy_scale"),
    "sim.dt": ("sim", "dt"), "sim.duration": ("sim", "duration"),
    "sim.kn": ("contact", "kn"), "sim.dn": ("contact", "dn"),
    "sim.mu": ("contact", "mu"), "sim.vreg": ("contact", "v_reg"),
    "sim.noise_sigma": ("sim", "noise_sigma"),
    "disturbance.impulse": ("disturbance", "impulse"),
    "disturbance.start": ("disturbance", "start"),
    "disturbance.duration": ("disturbance", "duration"),
    "metrics.settle_band": ("top", "settle_band"),
}
_INT_KEYS = {"sim.seed": ("sim", "seed")}
_BOOL_KEYS = {
    "stabilizer.enable": ("controller", "stabilizer_on"),
    "stabilizer.swing_level": ("controller", "swing_level_comp"),
    "compliance.enable": ("controller", "compliance_on"),
}
_STR_KEYS = {"sim.mode": ("sim", "mode")}
_PROFILE_KEYS = {"profile.vx": "profile_vx", "profile.wz": "profile_wz"}


def load_config(path: str) -> Scenario:
    """Parse a scenario file; raises ParseError / ValidationError."""
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].split(";", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(line_no, f"expected 'key = value', got {line!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            try:
                if key in _FLOAT_KEYS:
                    values[key] = float(val)
                elif key in _INT_KEYS:
                    values[key] = int(val)
                elif key in _BOOL_KEYS:
                    values[key] = _parse_bool(val)
                elif key in _STR_KEYS:
                    values[key] = val
                elif key in _PROFILE_KEYS:
                    values[key] = _parse_profile(val)
                else:
                    raise ParseError(line_no, f"unknown key {key!r}")
            except ParseError:
                raise
            except ValueError as exc:
                raise ParseError(line_no, f"bad value for {key}: {exc}") from exc
    return _build_scenario(values)


def _collect(values: dict, table: dict, section: str) -> dict:
    out = {}
    for key, (sec, attr) in table.items():
        if sec == section and key in values:
            out[attr] = values[key]
    return out


def _build_scenario(values: dict) -> Scenario:
    try:
        gait_params = replace(GaitParams(), **_collect(values, _FLOAT_KEYS, "gait"))
        geom_kwargs = _collect(values, _FLOAT_KEYS, "geometry")
        geometry = replace(RobotGeometry(), **geom_kwargs)
        gait_params = replace(gait_params, g=geometry.g)
        posture = replace(PostureGains(), **_collect(values, _FLOAT_KEYS, "posture"))
        raibert = replace(RaibertGains(), **_collect(values, _FLOAT_KEYS, "raibert"))
        ctrl_kwargs = _collect(values, _FLOAT_KEYS, "controller")
        ctrl_kwargs.update(_collect(values, _BOOL_KEYS, "controller"))
        sim_kwargs = _collect(values, _FLOAT_KEYS, "sim")
        sim_kwargs.update(_collect(values, _INT_KEYS, "sim"))
        sim_kwargs.update(_collect(values, _STR_KEYS, "sim"))
        contact = replace(ContactParams(), **_collect(values, _FLOAT_KEYS, "contact"))
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    compliance_on = ctrl_kwargs.get("compliance_on", True)
    if "mode" not in sim_kwargs:
        sim_kwargs["mode"] = "massless-leg" if compliance_on else "kinematic-foot"
    elif sim_kwargs["mode"] == "massless-leg" and not compliance_on:
        raise ValidationError(
            "massless-leg plant needs compliance forces; use sim.mode = kinematic-foot")
    try:
        sim_config = replace(SimConfig(), **sim_kwargs)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    controller = replace(ControllerConfig(), posture=posture, raibert=raibert,
                         dt=sim_config.dt, **ctrl_kwargs)

    disturbances: tuple[Disturbance, ...] = ()
    if "disturbance.impulse" in values:
        impulse = float(values["disturbance.impulse"])
        disturbances = (Disturbance(
            impulse=(0.0, -impulse, 0.0),
            start=float(values.get("disturbance.start", 3.0)),
            duration=float(values.get("disturbance.duration", 0.05))),)

    scenario = Scenario(
        gait=gait_params, geometry=geometry, controller=controller,
        contact=contact, sim=sim_config,
        profile_vx=values.get("profile.vx"),
        profile_wz=values.get("profile.wz", ((0.0, 0.0),)),
        disturbances=disturbances,
        settle_band=float(values.get("metrics.settle_band", 0.03)))
    _validate_scenario(scenario)
    return scenario


def _validate_scenario(scenario: Scenario) -> None:
    from .gait import validate
    violations = validate(scenario.gait)
    if violations:
        raise ValidationError("gait parameters invalid: " + "; ".join(violations))
    speeds = {v for _, v in scenario.vx_profile()}
    lo, hi = min(speeds), max(speeds)
    for v in sorted(speeds | {lo + k * (hi - lo) / 20 for k in range(21)}):
        try:
            derive_timeline(replace(scenario.gait, vx=v))
        except (GaitValidationError, InfeasibleGait) as exc:
            raise ValidationError(f"gait infeasible at vx={v:.3f}: {exc}") from exc


# --- telemetry ------------------------------------------------------------------

_LEG_TAGS = ("lf", "rf", "lh", "rh")


def telemetry_columns() -> list[str]:
    cols = ["t", "x", "y", "z", "vx", "vy", "vz", "roll", "pitch", "yaw",
            "droll", "dpitch", "dyaw", "vx_cmd", "wz_cmd", "dist", "ncontact"]
    for tag in _LEG_TAGS:
        cols += [f"{tag}_phase",
                 f"{tag}_des_x", f"{tag}_des_y", f"{tag}_des_z",
                 f"{tag}_act_x", f"{tag}_act_y", f"{tag}_act_z",
                 f"{tag}_contact", f"{tag}_fdz",
                 f"{tag}_tau1", f"{tag}_tau2", f"{tag}_tau3"]
    return cols


def _fmt(value: float) -> str:
    return "%.9g" % value


def write_telemetry(path: str, meta: dict, rows: list[list[float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, val in meta.items():
            fh.write(f"# {key}={val}\n")
        fh.write(",".join(telemetry_columns()) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_telemetry(path: str) -> tuple[dict, dict[str, np.ndarray]]:
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ").strip()
                if "=" in body:
                    k, _, v = body.partition("=")
                    meta[k.strip()] = v.strip()
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if header is None or not rows:
        raise InsufficientData(f"no telemetry rows in {path}")
    arr = np.array(rows)
    return meta, {name: arr[:, i] for i, name in enumerate(header)}


# --- metrics --------------------------------------------------------------------

@dataclass
class MetricsReport:
    """Scenario metrics derived from telemetry.

    Envelopes skip the first second (standing-start transient); speed
    statistics use steady windows only (command flat for at least one
    second). settle_time is measured from the end of the disturbance and
    is inf when the band is never held for 0.5 s.
    """

    duty_factor: float
    duty_factor_steady: float
    flight_fraction: float
    flight_cycle_fraction: float
    speed_err_mean: float
    speed_err_rms: float
    speed_err_max: float
    mean_speed_steady: float
    roll_env: float
    pitch_env: float
    settle_time: float
    distance: float
    min_height: float
    n_cycles: int

    def to_dict(self) -> dict:
        out = {}
        for key, val in self.__dict__.items():
            if isinstance(val, float) and not math.isfinite(val):
                out[key] = None
            elif isinstance(val, float):
                out[key] = round(val, 6)
            else:
                out[key] = val
        return out

    def __str__(self) -> str:
        return "\n".join(f"{k:22s} {v}" for k, v in self.to_dict().items())


def _steady_mask(t: np.ndarray, vx_cmd: np.ndarray, hold: float = 1.0) -> np.ndarray:
    dt = t[1] - t[0] if len(t) > 1 else 1.0
    slope = np.zeros_like(vx_cmd)
    slope[1:] = np.diff(vx_cmd) / dt
    moving = np.abs(slope) > 1e-9
    steady = np.zeros(len(t), dtype=bool)
    last_move = t[0]
    for i in range(len(t)):
        if moving[i]:
            last_move = t[i]
        steady[i] = (not moving[i]) and (t[i] - last_move >= hold)
    return steady


def _leg_cycles(contact: np.ndarray) -> list[tuple[int, int]]:
    c = contact > 0.5
    rising = np.flatnonzero(c[1:] & ~c[:-1]) + 1
    return [(int(a), int(b)) for a, b in zip(rising, rising[1:])]


def compute_metrics(data: dict[str, np.ndarray],
                    settle_band: float = 0.03) -> MetricsReport:
    t = data["t"]
    if len(t) < 2:
        raise InsufficientData("need at least two telemetry rows")
    steady = _steady_mask(t, data["vx_cmd"])
    zero_contact = data["ncontact"] < 0.5

    duties: list[float] = []
    duties_steady: list[float] = []
    n_cycles = 0
    any_signal = False
    for tag in _LEG_TAGS:
        c = data[f"{tag}_contact"]
        cycles = _leg_cycles(c)
        if cycles:
            any_signal = True
            for a, b in cycles:
                d = float(np.mean(c[a:b] > 0.5))
                duties.append(d)
                n_cycles += 1
                if steady[a:b].all():
                    duties_steady.append(d)
        elif np.all(c > 0.5):
            any_signal = True
            duties.append(1.0)
    if not any_signal:
        raise InsufficientData("no contact activity in telemetry")

    flight_cycles = []
    for a, b in _leg_cycles(data["lf_contact"]):
        if steady[a:b].all():
            flight_cycles.append(bool(np.any(zero_contact[a:b])))
    flight_cycle_fraction = (float(np.mean(flight_cycles))
                             if flight_cycles else float("nan"))

    err = data["vx"] - data["vx_cmd"]
    if steady.any():
        es = err[steady]
        speed_err_mean = float(np.mean(es))
        speed_err_rms = float(np.sqrt(np.mean(es * es)))
        speed_err_max = float(np.max(np.abs(es)))
        mean_speed_steady = float(np.mean(data["vx"][steady]))
    else:
        speed_err_mean = speed_err_rms = speed_err_max = float("nan")
        mean_speed_steady = float("nan")

    after_start = t >= t[0] + 1.0
    roll_env = float(np.max(np.abs(data["roll"][after_start]))) if after_start.any() else float("nan")
    pitch_env = float(np.max(np.abs(data["pitch"][after_start]))) if after_start.any() else float("nan")

    dist_on = data["dist"] > 0.5
    t_ref = float(t[np.flatnonzero(dist_on)[-1]]) if dist_on.any() else float(t[0])
    settle_time = float("inf")
    dt = t[1] - t[0]
    need = max(1, int(round(0.5 / dt)))
    in_band = np.abs(data["roll"]) <= settle_band
    start_idx = int(np.searchsorted(t, t_ref))
    run = 0
    for i in range(start_idx, len(t)):
        run = run + 1 if in_band[i] else 0
        if run >= need:
            settle_time = float(t[i - run + 1] - t_ref)
            break

    distance = float(math.hypot(data["x"][-1] - data["x"][0],
                                data["y"][-1] - data["y"][0]))
    return MetricsReport(
        duty_factor=float(np.mean(duties)) if duties else float("nan"),
        duty_factor_steady=(float(np.mean(duties_steady))
                            if duties_steady else float("nan")),
        flight_fraction=float(np.mean(zero_contact)),
        flight_cycle_fraction=flight_cycle_fraction,
        speed_err_mean=speed_err_mean, speed_err_rms=speed_err_rms,
        speed_err_max=speed_err_max, mean_speed_steady=mean_speed_steady,
        roll_env=roll_env, pitch_env=pitch_env, settle_time=settle_time,
        distance=distance, min_height=float(np.min(data["z"])),
        n_cycles=n_cycles)


# --- scenario execution ---------------------------------------------------------

def _telemetry_meta(scenario: Scenario, sim: Simulator) -> dict:
    return {
        "schema": "quadtrot-telemetry-v1",
        "config_hash": scenario.config_hash(),
        "inertia": " ".join(_fmt(v) for v in sim.inertia),
        "mode": scenario.sim.mode,
        "seed": scenario.sim.seed,
    }


def run_scenario(scenario: Scenario, out_path: str | None = None,
                 initial_rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)
                 ) -> MetricsReport:
    """Run the closed loop for the configured duration; returns metrics.

    Telemetry is written to out_path when given. Deterministic for a
    fixed scenario and seed.
    """
    geom = scenario.geometry
    sim = Simulator(geom, scenario.contact, scenario.sim)
    sim.disturbances = list(scenario.disturbances)
    controller = TrotController(geom, scenario.gait, scenario.controller)
    world = sim.standing_state(-scenario.gait.zs)
    if any(initial_rpy):
        from .simulator import quat_from_rpy
        world.quat = quat_from_rpy(*initial_rpy)

    vx_profile = scenario.vx_profile()
    n_ticks = int(round(scenario.sim.duration / scenario.sim.dt))
    hips = [hip_origin(leg, geom) for leg in LEGS]
    rows: list[list[float]] = []

    try:
        for k in range(n_ticks):
            sensors = sim.readout(world)
            t = sensors.t
            vx_cmd = profile_value(vx_profile, t)
            wz_cmd = profile_value(scenario.profile_wz, t)
            commands = controller.tick(sensors, vx_cmd, wz_cmd)

            dist_active = any(np.any(d.force_at(t)) for d in scenario.disturbances)
            row = [t, *world.pos, *world.vel, *sensors.rpy, *sensors.rpy_rate,
                   vx_cmd, wz_cmd, 1.0 if dist_active else 0.0,
                   float(np.count_nonzero(world.contact))]
            for i in range(4):
                cmd = commands[i]
                des = hips[i] + cmd.p_des
                act = hips[i] + sensors.foot_pos_hip[i]
                row += [float(cmd.phase), *des, *act,
                        1.0 if world.contact[i] else 0.0, float(cmd.f_d[2]),
                        *cmd.tau]
            rows.append(row)
            world = sim.step(world, commands)
    except SimulationDiverged:
        if out_path is not None and rows:
            write_telemetry(out_path, _telemetry_meta(scenario, sim), rows)
        raise

    if out_path is not None:
        write_telemetry(out_path, _telemetry_meta(scenario, sim), rows)

    # Metrics are computed from the telemetry representation (values as
    # serialized), so the returned report matches one recomputed from the
    # written file exactly.
    arr = np.array([[float(_fmt(v)) for v in row] for row in rows])
    cols = telemetry_columns()
    data = {name: arr[:, i] for i, name in enumerate(cols)}
    return compute_metrics(data, settle_band=scenario.settle_band)


def plan_rows(scenario: Scenario, dt: float | None = None
              ) -> tuple[list[str], list[list]]:
    """Sampled open-loop foot plan over one cycle for all legs (body frame)."""
    dt = dt or scenario.sim.dt
    cycle = PlannedCycle(scenario.gait, scenario.controller.raibert)
    timeline = cycle.timeline
    header = ["t", "leg", "phase", "px", "py", "pz", "vx", "vy", "vz"]
    rows: list[list] = []
    n = int(round(timeline.T / dt))
    from .gait import cycle_time, phase_at
    for i, leg in enumerate(LEGS):
        hip = hip_origin(leg, scenario.geometry)
        y_neutral = leg.side * scenario.geometry.a1
        for k in range(n + 1):
            t = min(k * dt, timeline.T)
            tau = cycle_time(timeline, t, leg.group)
            phase, _ = phase_at(timeline, t, leg.group)
            p, v = cycle.eval(tau)
            rows.append([t, _LEG_TAGS[i], int(phase),
                         hip[0] + p[0], hip[1] + y_neutral + p[1], p[2],
                         v[0], v[1], v[2]])
    return header, rows
