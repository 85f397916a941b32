"""Command-line entry points: run a scenario, dump a plan, compute metrics.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
divergence during simulation.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (InsufficientData, ParseError, ValidationError,
                      compute_metrics, load_config, plan_rows, read_telemetry,
                      run_scenario)
from .simulator import SimulationDiverged


def _cmd_run(args) -> int:
    scenario = load_config(args.config)
    report = run_scenario(scenario, out_path=args.out)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report)
    return 0


def _cmd_plan(args) -> int:
    scenario = load_config(args.config)
    header, rows = plan_rows(scenario)
    from .trajectory import synth_z_keyframes
    kf = synth_z_keyframes(scenario.gait)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for t, p, v in zip(kf.times, kf.pos, kf.vel):
            fh.write(f"# knot t={t:.6f} z={p:.6f} vz={v:.6f}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) if isinstance(v, str) else "%.9g" % v
                              for v in row) + "\n")
    print(f"wrote plan to {args.out}")
    return 0


def _cmd_metrics(args) -> int:
    _, data = read_telemetry(args.csv)
    report = compute_metrics(data, settle_band=args.settle_band)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quadtrot",
        description="Flying-trot planner, controller, and trunk simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a closed-loop scenario")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="telemetry.csv")
    p_run.add_argument("--json", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_plan = sub.add_parser("plan", help="dump the open-loop foot plan")
    p_plan.add_argument("--config", required=True)
    p_plan.add_argument("--out", default="plan.csv")
    p_plan.set_defaults(func=_cmd_plan)

    p_met = sub.add_parser("metrics", help="compute metrics from telemetry")
    p_met.add_argument("csv")
    p_met.add_argument("--json", action="store_true")
    p_met.add_argument("--settle-band", type=float, default=0.03)
    p_met.set_defaults(func=_cmd_metrics)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, InsufficientData, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
