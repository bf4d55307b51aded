import json
from pathlib import Path

import pytest

from test_workbench import toy_demand_rows, write_toy_dataset

from resopt.workbench.cli import main
from resopt.workbench.io import load_outcomes


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_gen_synthetic_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("gen-synthetic", "--out", a, "--years", 3, "--seed", 7) == 0
    assert run_cli("gen-synthetic", "--out", b, "--years", 3, "--seed", 7) == 0
    for name in ("series.csv", "demands.csv", "system.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    c = tmp_path / "c"
    assert run_cli("gen-synthetic", "--out", c, "--years", 3, "--seed", 8) == 0
    assert (a / "series.csv").read_bytes() != (c / "series.csv").read_bytes()


def write_config(tmp_path, **kw):
    config = {
        "solver": "ndp",
        "series": "series.csv",
        "demands": "demands.csv",
        "system": "system.json",
        "weights": [30, 30, 2, 1, 0, 0, 0, 0],
        "grid_step": 500.0,
    }
    config.update(kw)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def latest_run_dir(state_dir: Path) -> Path:
    registry = json.loads((state_dir / "registry.json").read_text())
    run_id = sorted(registry["runs"])[-1]
    return Path(registry["runs"][run_id]["outdir"])


def test_optimize_simulate_report_pipeline(tmp_path, capsys):
    write_toy_dataset(tmp_path)
    config = write_config(tmp_path)
    state = tmp_path / "state"
    assert run_cli("optimize", "--config", config, "--state-dir", state) == 0
    run_dir = latest_run_dir(state)
    assert (run_dir / "summary.json").is_file()

    # replaying the exported policy reproduces the stored trajectory
    out = tmp_path / "sim.json"
    assert run_cli("simulate", "--run-dir", run_dir, "--out", out) == 0
    stored = load_outcomes(run_dir / "outcomes.json")
    replayed = load_outcomes(out)
    assert replayed.equals(stored)

    assert run_cli("report", "--run-dir", run_dir) == 0
    captured = capsys.readouterr().out
    assert "total cost" in captured
    report_dir = run_dir / "report"
    assert (report_dir / "trajectory.csv").is_file()
    deficits = (report_dir / "deficits.csv").read_text().splitlines()
    summary = json.loads((run_dir / "summary.json").read_text())
    got = [float(x) for x in deficits[1].split(",")]
    assert got == pytest.approx(summary["objective_sums"])


def test_sweep_command(tmp_path):
    write_toy_dataset(tmp_path)
    manifest = {
        "solver": "ndp",
        "weight_sets": [[30, 30, 2, 1, 0, 0, 0, 0], [30, 30, 1, 2, 0, 0, 0, 0]],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    state = tmp_path / "state"
    assert run_cli(
        "sweep", "--manifest", tmp_path / "manifest.json",
        "--series", tmp_path / "series.csv", "--demands", tmp_path / "demands.csv",
        "--system", tmp_path / "system.json", "--grid-step", 500,
        "--state-dir", state,
    ) == 0
    run_dir = latest_run_dir(state)
    # the latest record is a child; find the moss parent via pareto report
    registry = json.loads((state / "registry.json").read_text())
    parents = [r for r in registry["runs"].values() if r["solver"] == "moss"]
    assert len(parents) == 1
    assert parents[0]["status"] == "done"
    assert run_cli("report", "--run-dir", parents[0]["outdir"]) == 0
    assert (Path(parents[0]["outdir"]) / "report" / "pareto.csv").is_file()
    del run_dir


def test_optimize_rejects_bad_config(tmp_path, capsys):
    write_toy_dataset(tmp_path)
    config = write_config(tmp_path, weights=[1, 2, 3])
    code = run_cli("optimize", "--config", config, "--state-dir", tmp_path / "s")
    assert code == 2
    assert "weights" in capsys.readouterr().err


def test_failed_run_exits_nonzero(tmp_path, capsys):
    write_toy_dataset(tmp_path)
    # an impossible grid: below the dead storage
    config = write_config(tmp_path, grid_levels=[10.0, 20.0], grid_step=None)
    code = run_cli("optimize", "--config", config, "--state-dir", tmp_path / "s")
    assert code == 1
    assert "failed" in capsys.readouterr().err


def test_simulate_on_fresh_series(tmp_path):
    write_toy_dataset(tmp_path)
    config = write_config(tmp_path)
    state = tmp_path / "state"
    assert run_cli("optimize", "--config", config, "--state-dir", state) == 0
    run_dir = latest_run_dir(state)
    other = tmp_path / "other"
    other.mkdir()
    write_toy_dataset(other, years=2, seed=99)
    out = tmp_path / "cross.json"
    assert run_cli(
        "simulate", "--run-dir", run_dir, "--series", other / "series.csv",
        "--demands", other / "demands.csv", "--system", other / "system.json",
        "--start", 2500, "--out", out,
    ) == 0
    sim = load_outcomes(out)
    assert len(sim) == 24
    assert sim.s_start[0] == 2500.0
