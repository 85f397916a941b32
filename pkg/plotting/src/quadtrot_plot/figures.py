"""Render post-hoc figures from quadtrot telemetry CSV.

Four figure kinds: posture traces (roll/pitch vs time), speed tracking
(commanded vs actual forward speed), the left-fore foot trajectory in
the body xz-plane (desired vs actual), and a gait diagram with one band
per leg whose filled stance intervals equal the CSV contact runs
exactly. Input is the telemetry schema only; nothing here imports the
controller stack.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "quadtrot-plot"

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("posture", "speed", "traj_xz", "gait")
_ALIASES = {"traj": "traj_xz"}

LEG_TAGS = ("lf", "rf", "lh", "rh")
LEG_LABELS = {"lf": "LF", "rf": "RF", "lh": "LH", "rh": "RH"}

_REQUIRED = {
    "posture": ("t", "roll", "pitch"),
    "speed": ("t", "vx", "vx_cmd"),
    "traj_xz": ("t", "lf_des_x", "lf_des_z", "lf_act_x", "lf_act_z"),
    "gait": ("t", "lf_contact", "rf_contact", "lh_contact", "rh_contact"),
}


class SchemaError(ValueError):
    """Telemetry is missing columns a figure needs."""


class EmptyInput(ValueError):
    """Telemetry has no data rows."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv: str
    out: str
    window: tuple[float, float] | None = None


def normalize_kind(kind: str) -> str:
    kind = _ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {KINDS}")
    return kind


def read_telemetry(path: str) -> dict[str, np.ndarray]:
    """Parse a telemetry CSV ('#' lines are comments, first row is the
    header) into named columns."""
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if header is None or not rows:
        raise EmptyInput(f"no telemetry rows in {path}")
    arr = np.array(rows)
    return {name: arr[:, i] for i, name in enumerate(header)}


def _check_schema(kind: str, data: dict[str, np.ndarray]) -> None:
    missing = [c for c in _REQUIRED[kind] if c not in data]
    if missing:
        raise SchemaError(f"{kind} figure needs columns {missing}")


def _apply_window(data: dict[str, np.ndarray],
                  window: tuple[float, float] | None) -> dict[str, np.ndarray]:
    if window is None:
        return data
    t = data["t"]
    lo, hi = window
    if lo < t[0] - 1e-9 or hi > t[-1] + 1e-9 or hi <= lo:
        raise ValueError(f"window {window} outside telemetry range "
                         f"[{t[0]:.3f}, {t[-1]:.3f}]")
    mask = (t >= lo) & (t <= hi)
    return {k: v[mask] for k, v in data.items()}


def contact_runs(t: np.ndarray, contact: np.ndarray) -> list[tuple[float, float]]:
    """(start, duration) of every contiguous contact run, unsmoothed."""
    flags = contact > 0.5
    runs = []
    start = None
    dt = float(t[1] - t[0]) if len(t) > 1 else 0.0
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = t[i]
        elif not flag and start is not None:
            runs.append((float(start), float(t[i] - start)))
            start = None
    if start is not None:
        runs.append((float(start), float(t[-1] - start + dt)))
    return runs


def _fig_posture(data, ax):
    ax.plot(data["t"], data["roll"], label="roll", lw=0.8)
    ax.plot(data["t"], data["pitch"], label="pitch", lw=0.8)
    ax.axhline(0.0, color="k", lw=0.5, ls="--", label="desired")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("angle (rad)")
    ax.set_title("trunk posture")
    ax.legend(loc="upper right", fontsize=8)


def _fig_speed(data, ax):
    ax.plot(data["t"], data["vx_cmd"], "r--", lw=1.0, label="commanded")
    ax.plot(data["t"], data["vx"], "g-", lw=0.8, label="actual")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("forward speed (m/s)")
    ax.set_title("speed tracking")
    ax.legend(loc="upper right", fontsize=8)


def _fig_traj_xz(data, ax):
    ax.plot(data["lf_des_x"], data["lf_des_z"], "r--", lw=0.8, label="desired")
    ax.plot(data["lf_act_x"], data["lf_act_z"], "g-", lw=0.6, label="actual")
    ax.set_xlabel("x (m, body frame)")
    ax.set_ylabel("z (m, body frame)")
    ax.set_title("left-fore foot trajectory (xz)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="upper right", fontsize=8)


def _fig_gait(data, ax):
    for row, tag in enumerate(LEG_TAGS):
        runs = contact_runs(data["t"], data[f"{tag}_contact"])
        ax.broken_barh(runs, (row + 0.1, 0.8), facecolors="tab:blue")
    ax.set_yticks([r + 0.5 for r in range(4)])
    ax.set_yticklabels([LEG_LABELS[tag] for tag in LEG_TAGS])
    ax.set_ylim(0, 4)
    ax.set_xlabel("time (s)")
    ax.set_title("gait diagram (filled = stance)")


_RENDERERS = {"posture": _fig_posture, "speed": _fig_speed,
              "traj_xz": _fig_traj_xz, "gait": _fig_gait}


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path."""
    kind = normalize_kind(spec.kind)
    data = read_telemetry(spec.csv)
    _check_schema(kind, data)
    data = _apply_window(data, spec.window)

    fig, ax = plt.subplots(figsize=(6.0, 3.2), dpi=120)
    _RENDERERS[kind](data, ax)
    fig.tight_layout()
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if out.suffix == ".svg" else {}
    fig.savefig(out, metadata=metadata)
    plt.close(fig)
    return str(out)


def render_all(csv: str, out_dir: str, svg: bool = False,
               window: tuple[float, float] | None = None) -> list[str]:
    """One file per figure kind with deterministic names."""
    ext = "svg" if svg else "png"
    outputs = []
    for kind in KINDS:
        spec = FigureSpec(kind=kind, csv=csv,
                          out=str(Path(out_dir) / f"{kind}.{ext}"),
                          window=window)
        outputs.append(render(spec))
    return outputs
