import hashlib
from pathlib import Path

import numpy as np
import pytest

from quadtrot_plot.figures import (EmptyInput, FigureSpec, SchemaError,
                                   contact_runs, read_telemetry, render,
                                   render_all)


def make_csv(path: Path, columns: dict[str, np.ndarray], comments=True) -> str:
    names = list(columns)
    n = len(next(iter(columns.values())))
    with open(path, "w") as fh:
        if comments:
            fh.write("# schema=quadtrot-telemetry-v1\n# config_hash=abc\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join("%.9g" % columns[c][i] for c in names) + "\n")
    return str(path)


@pytest.fixture()
def telemetry_csv(tmp_path):
    n = 400
    t = np.arange(n) * 1e-3
    phase = np.arange(n) % 100
    lf = (phase < 40).astype(float)
    rf = np.roll(lf, 50)
    cols = {
        "t": t,
        "vx": 0.5 + 0.05 * np.sin(20 * t),
        "vx_cmd": np.full(n, 0.5),
        "roll": 0.02 * np.sin(30 * t),
        "pitch": 0.03 * np.cos(30 * t),
        "lf_des_x": 0.08 + 0.02 * np.sin(20 * t),
        "lf_des_z": -0.10 + 0.02 * np.cos(20 * t),
        "lf_act_x": 0.08 + 0.02 * np.sin(20 * t + 0.1),
        "lf_act_z": -0.10 + 0.02 * np.cos(20 * t + 0.1),
        "lf_contact": lf,
        "rf_contact": rf,
        "lh_contact": rf.copy(),
        "rh_contact": lf.copy(),
    }
    return make_csv(tmp_path / "tele.csv", cols), cols


def test_contact_runs_exact():
    t = np.arange(10) * 0.01
    c = np.array([1, 1, 0, 0, 1, 1, 1, 0, 1, 1], dtype=float)
    runs = contact_runs(t, c)
    assert runs[0] == (0.0, pytest.approx(0.02))
    assert runs[1] == (pytest.approx(0.04), pytest.approx(0.03))
    # Final run extends through the last sample.
    assert runs[2][0] == pytest.approx(0.08)
    assert runs[2][1] == pytest.approx(0.02)
    assert len(runs) == 3


def test_render_each_kind(telemetry_csv, tmp_path):
    csv, _ = telemetry_csv
    for kind in ("posture", "speed", "traj_xz", "gait"):
        out = tmp_path / f"{kind}.png"
        path = render(FigureSpec(kind=kind, csv=csv, out=str(out)))
        assert Path(path).exists()
        assert Path(path).stat().st_size > 1000


def test_render_accepts_traj_alias(telemetry_csv, tmp_path):
    csv, _ = telemetry_csv
    out = render(FigureSpec(kind="traj", csv=csv, out=str(tmp_path / "x.png")))
    assert Path(out).exists()


def test_render_all_creates_missing_dir(telemetry_csv, tmp_path):
    csv, _ = telemetry_csv
    out_dir = tmp_path / "not" / "yet" / "there"
    files = render_all(csv, str(out_dir))
    assert len(files) == 4
    assert all(Path(f).exists() for f in files)


def test_render_deterministic_bytes(telemetry_csv, tmp_path):
    csv, _ = telemetry_csv
    digests = []
    for sub in ("a", "b"):
        files = render_all(csv, str(tmp_path / sub), svg=True)
        digests.append([hashlib.sha256(Path(f).read_bytes()).hexdigest()
                        for f in files])
    assert digests[0] == digests[1]


def test_gait_runs_match_contact_flags(telemetry_csv):
    csv, cols = telemetry_csv
    data = read_telemetry(csv)
    runs = contact_runs(data["t"], data["lf_contact"])
    # 4 cycles of 40 ms stance each, no smoothing.
    assert len(runs) == 4
    for start, dur in runs:
        assert dur == pytest.approx(0.040, abs=1e-9)


def test_schema_error(tmp_path):
    csv = make_csv(tmp_path / "bad.csv",
                   {"t": np.arange(5) * 1e-3, "vx": np.zeros(5)})
    with pytest.raises(SchemaError):
        render(FigureSpec(kind="posture", csv=csv, out=str(tmp_path / "x.png")))


def test_empty_input(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("# only comments\nt,vx\n")
    with pytest.raises(EmptyInput):
        render(FigureSpec(kind="speed", csv=str(p), out=str(tmp_path / "x.png")))


def test_window_validation(telemetry_csv, tmp_path):
    csv, _ = telemetry_csv
    out = render(FigureSpec(kind="speed", csv=csv, out=str(tmp_path / "w.png"),
                            window=(0.1, 0.3)))
    assert Path(out).exists()
    with pytest.raises(ValueError):
        render(FigureSpec(kind="speed", csv=csv, out=str(tmp_path / "y.png"),
                          window=(0.0, 99.0)))


def test_cli(telemetry_csv, tmp_path):
    from quadtrot_plot.cli import main
    csv, _ = telemetry_csv
    out = tmp_path / "figs"
    assert main([csv, "--figs", "posture,speed,traj,gait",
                 "--out", str(out)]) == 0
    assert len(list(out.glob("*.png"))) == 4
    assert main([str(tmp_path / "missing.csv"), "--out", str(out)]) == 2
    bad = make_csv(tmp_path / "bad.csv", {"t": np.arange(5) * 1e-3})
    assert main([bad, "--figs", "gait", "--out", str(out)]) == 2


def test_real_running_telemetry_renders(tmp_path):
    # End-to-end against the primary component's external interface.
    quadtrot = pytest.importorskip("quadtrot")
    from dataclasses import replace
    from quadtrot.harness import load_config, run_scenario, scenario_path
    sc = load_config(scenario_path("running.ini"))
    sc.sim = replace(sc.sim, duration=2.0)
    csv = tmp_path / "running.csv"
    run_scenario(sc, out_path=str(csv))
    files = render_all(str(csv), str(tmp_path / "figs"))
    assert len(files) == 4
    data = read_telemetry(str(csv))
    for tag in ("lf", "rf", "lh", "rh"):
        assert contact_runs(data["t"], data[f"{tag}_contact"])
