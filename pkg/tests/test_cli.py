"""Command-line interface tests (exit codes, files written, overrides)."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from batrack.cli import main
from batrack.harness import read_log_csv, scenario_from_dict


@pytest.fixture()
def runner():
    return CliRunner()


def _run_ok(runner, args):
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    return result


def test_run_writes_csv_and_resolved_config(runner, tmp_path):
    out = tmp_path / "case"
    _run_ok(runner, ["run", "--scenario", "default", "--duration", "0.5",
                     "--out", str(out)])
    data = read_log_csv(out / "trajectory.csv")
    assert data.shape[0] == 500
    with open(out / "config.resolved.json") as f:
        saved = json.load(f)
    cfg = scenario_from_dict(saved)  # the resolved config is itself loadable
    assert cfg.duration == 0.5
    assert cfg.derivative_cutoff_hz is None  # noiseless: no smoothing resolved in


def test_run_overrides_are_applied(runner, tmp_path):
    out = tmp_path / "ov"
    _run_ok(runner, ["run", "--scenario", "default", "--duration", "0.2",
                     "--seed", "9", "--noise", "--cutoff-hz", "4.5",
                     "--use-true-w", "--actuation", "direct_accel",
                     "--include-wd-dot", "--apply-visibility-correction",
                     "--out", str(out)])
    with open(out / "config.resolved.json") as f:
        saved = json.load(f)
    assert saved["rng_seed"] == 9
    assert saved["noise"]["bearing_std_deg"] == 1.0
    assert saved["derivative_cutoff_hz"] == 4.5
    assert saved["use_true_w"] is True
    assert saved["actuation"] == "direct_accel"
    assert saved["gains"]["include_wd_dot"] is True
    assert saved["apply_visibility_correction"] is True


def test_run_uses_out_root_env(runner, tmp_path, monkeypatch):
    monkeypatch.setenv("BATRACK_OUT_ROOT", str(tmp_path / "root"))
    _run_ok(runner, ["run", "--scenario", "default", "--duration", "0.1"])
    assert (tmp_path / "root" / "default" / "trajectory.csv").exists()


def test_run_rejects_unknown_scenario(runner):
    result = runner.invoke(main, ["run", "--scenario", "no-such-file.json"])
    assert result.exit_code == 2


def test_run_rejects_invalid_scenario_file(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    result = runner.invoke(main, ["run", "--scenario", str(bad)])
    assert result.exit_code == 2
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps({"target_radius": -1.0}))
    result2 = runner.invoke(main, ["run", "--scenario", str(bad2)])
    assert result2.exit_code == 2


def test_run_exits_nonzero_on_fault(runner, tmp_path):
    # vehicle placed at the target center: the first observation faults
    scen = tmp_path / "fault.json"
    scen.write_text(json.dumps({
        "vehicle": {"position": [3.0, 0.1, -1.0]},
        "duration": 1.0,
    }))
    out = tmp_path / "fault_out"
    result = runner.invoke(main, ["run", "--scenario", str(scen), "--out", str(out)])
    assert result.exit_code == 3
    assert (out / "trajectory.csv").exists()  # the (empty) log is still written


def test_run_with_plot_renders_figures(runner, tmp_path):
    out = tmp_path / "fig"
    _run_ok(runner, ["run", "--scenario", "default", "--duration", "0.2",
                     "--out", str(out), "--plot"])
    assert (out / "trajectory.pdf").stat().st_size > 0
    assert (out / "timeseries.pdf").stat().st_size > 0


def test_plot_command_from_csv(runner, tmp_path):
    out = tmp_path / "p"
    _run_ok(runner, ["run", "--scenario", "default", "--duration", "0.2",
                     "--out", str(out)])
    _run_ok(runner, ["plot", str(out / "trajectory.csv"), "--format", "svg"])
    assert (out / "trajectory.svg").stat().st_size > 0
    assert (out / "timeseries.svg").stat().st_size > 0


def test_plot_rejects_malformed_csv(runner, tmp_path):
    bad = tmp_path / "junk.csv"
    bad.write_text("nope\n1,2\n")
    result = runner.invoke(main, ["plot", str(bad)])
    assert result.exit_code == 2


def test_sweep_runs_grid_and_writes_summary(runner, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"parameters": [
        {"path": "duration", "values": [0.2]},
        {"path": "gains.k1", "values": [0.3, 0.5]},
    ]}))
    out = tmp_path / "sweep"
    _run_ok(runner, ["sweep", "default", str(grid), "--out", str(out),
                     "--jobs", "1"])
    lines = (out / "summary.csv").read_text().strip().splitlines()
    assert len(lines) == 3  # header + 2 cells
    assert lines[0].startswith("cell,duration,gains.k1,fault,converged")
    for cell in ("cell_000", "cell_001"):
        assert (out / cell / "trajectory.csv").exists()
        assert (out / cell / "config.resolved.json").exists()
    k1s = [json.load(open(out / c / "config.resolved.json"))["gains"]["k1"]
           for c in ("cell_000", "cell_001")]
    assert sorted(k1s) == [0.3, 0.5]


def test_sweep_rejects_bad_grid(runner, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"parameters": []}))
    result = runner.invoke(main, ["sweep", "default", str(grid)])
    assert result.exit_code == 2
    grid.write_text(json.dumps({"parameters": [{"path": "gains.k1"}]}))
    result2 = runner.invoke(main, ["sweep", "default", str(grid)])
    assert result2.exit_code == 2
