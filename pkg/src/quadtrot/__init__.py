"""Flying-trot gait pipeline for a desk-scale quadruped: offline foot
trajectory planning, real-time posture/velocity/compliance control, and a
rigid-trunk physics simulator with a scenario harness."""

from .compliance import (FootCommand, VirtualGains, gravity_comp,
                         map_to_torques, tune_vertical_gains, virtual_force)
from .controller import ControllerConfig, TrotController
from .gait import (GaitParams, InfeasibleGait, LegPhase, PhaseTimeline,
                   derive_timeline, phase_at, planned_duty_factor,
                   preferred_frequency, preferred_speed, validate)
from .geometry import (Leg, LEGS, JointAngles, RobotGeometry, UnreachableTarget,
                       fk_foot, hip_origin, ik_leg, jacobian)
from .harness import (MetricsReport, Scenario, compute_metrics, load_config,
                      read_telemetry, run_scenario)
from .simulator import (ContactParams, Disturbance, SimConfig,
                        SimulationDiverged, Simulator, WorldState,
                        contact_force)
from .trajectory import (FlightProfile, HermiteSpline, RaibertGains,
                         ZKeyframes, apply_heading, eval_z, flight_profile,
                         plan_support_x, plan_swing_x, synth_z_keyframes)

__version__ = "0.1.0"
