"""quadtrot-plot: render figures from a telemetry CSV."""

from __future__ import annotations

import argparse
import sys

from .figures import (KINDS, EmptyInput, FigureSpec, SchemaError,
                      normalize_kind, render)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quadtrot-plot",
        description="Render posture, speed, foot-trajectory, and gait "
                    "figures from quadtrot telemetry")
    parser.add_argument("csv", help="telemetry CSV file")
    parser.add_argument("--figs", default="posture,speed,traj,gait",
                        help="comma-separated figure kinds")
    parser.add_argument("--out", default="figures", help="output directory")
    parser.add_argument("--svg", action="store_true", help="emit SVG")
    parser.add_argument("--window", default=None,
                        help="time window as start:end (s)")
    args = parser.parse_args(argv)

    window = None
    if args.window:
        try:
            lo, _, hi = args.window.partition(":")
            window = (float(lo), float(hi))
        except ValueError:
            print(f"error: bad window {args.window!r}", file=sys.stderr)
            return 2

    ext = "svg" if args.svg else "png"
    try:
        kinds = [normalize_kind(k.strip()) for k in args.figs.split(",") if k.strip()]
        for kind in kinds:
            spec = FigureSpec(kind=kind, csv=args.csv,
                              out=f"{args.out}/{kind}.{ext}", window=window)
            path = render(spec)
            print(f"wrote {path}")
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, EmptyInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
