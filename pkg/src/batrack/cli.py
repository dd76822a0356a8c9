"""Command-line interface: run scenarios, render figures, sweep parameter grids.

Exit codes: 0 success, 2 configuration/usage error, 3 runtime fault during a
requested run.  The default output root is the BATRACK_OUT_ROOT environment
variable (falling back to ./runs).
"""

from __future__ import annotations

import itertools
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from .harness import (
    ACTUATION_MODES,
    BUILTIN_SCENARIOS,
    ConfigInvalid,
    NoiseConfig,
    RunResult,
    ScenarioConfig,
    SchemaMismatch,
    default_scenario,
    diagnostics,
    enable_noise,
    load_scenario,
    read_log_csv,
    run as run_scenario,
    run_batch,
    scenario_from_dict,
)
from .plotting import plot_time_series, plot_trajectory


def _out_root() -> Path:
    return Path(os.environ.get("BATRACK_OUT_ROOT", "runs"))


def _resolve_scenario(name: str) -> tuple[ScenarioConfig, str]:
    if name in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[name](), name
    path = Path(name)
    if not path.exists():
        raise ConfigInvalid(
            f"scenario {name!r} is neither a built-in ({', '.join(sorted(BUILTIN_SCENARIOS))}) "
            f"nor an existing file"
        )
    return load_scenario(path), path.stem


def _write_outputs(result: RunResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    result.write_csv(out_dir / "trajectory.csv")
    with open(out_dir / "config.resolved.json", "w") as f:
        json.dump(result.config.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def _echo_summary(result: RunResult) -> None:
    diag = diagnostics(result)
    n = result.data.shape[0]
    click.echo(f"records: {n}")
    if result.fault:
        click.echo(f"fault at t={result.fault_t:.6g}: {result.fault}")
    if n:
        click.echo(
            "final errors: |delta1|={:.3e}  |delta2|={:.3e}  |delta3|={:.3e}".format(
                diag.err_bearing[-1], diag.err_size[-1], diag.err_velocity[-1]
            )
        )
        click.echo(f"final estimates: r_hat={result.col('r_hat')[-1]:.6g}  "
                   f"rho_hat={np.array2string(result.vec('rho_hat')[-1], precision=4)}")
        click.echo(
            f"min visibility margin: commanded={diag.min_margin_cmd:.3e}  "
            f"true={diag.min_margin_true:.3e}"
        )
        click.echo(f"converged: {diag.converged}")


@click.group()
def main() -> None:
    """Bearing-angle target tracking simulator."""


@main.command("run")
@click.option("--scenario", default="paper", show_default=True,
              help="Built-in scenario name or path to a scenario JSON file.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Output directory [default: $BATRACK_OUT_ROOT/<scenario>].")
@click.option("--seed", type=int, default=None, help="Override rng_seed.")
@click.option("--duration", type=float, default=None, help="Override duration [s].")
@click.option("--dt-control", type=float, default=None, help="Override dt_control [s].")
@click.option("--dt-physics", type=float, default=None, help="Override dt_physics [s].")
@click.option("--noise/--no-noise", "noise_flag", default=None,
              help="Force measurement noise on (benchmark levels) or off.")
@click.option("--include-wd-dot/--no-include-wd-dot", "wd_dot_flag", default=None,
              help="Override the w_d-rate feedforward switch.")
@click.option("--cutoff-hz", type=float, default=None,
              help="Override the derivative low-pass cutoff [Hz].")
@click.option("--use-true-w", is_flag=True, default=False,
              help="Diagnostic: feed exact scaled velocity to the controller.")
@click.option("--actuation", type=click.Choice(ACTUATION_MODES), default=None,
              help="Diagnostic: how the acceleration command is realized.")
@click.option("--apply-visibility-correction/--no-apply-visibility-correction",
              "vis_flag", default=None,
              help="Steer the attitude with the dead-zone-corrected axis "
                   "instead of the raw force direction.")
@click.option("--plot", "render", is_flag=True, default=False,
              help="Also render the two figures next to the CSV.")
def cmd_run(scenario, out_dir, seed, duration, dt_control, dt_physics, noise_flag,
            wd_dot_flag, cutoff_hz, use_true_w, actuation, vis_flag, render) -> None:
    """Simulate a scenario and write trajectory.csv + config.resolved.json."""
    try:
        cfg, label = _resolve_scenario(scenario)
        if seed is not None:
            cfg = replace(cfg, rng_seed=seed)
        if duration is not None:
            cfg = replace(cfg, duration=duration)
        if dt_control is not None:
            cfg = replace(cfg, dt_control=dt_control)
        if dt_physics is not None:
            cfg = replace(cfg, dt_physics=dt_physics)
        if noise_flag is True and not cfg.noise.enabled:
            cfg = enable_noise(cfg)
        elif noise_flag is False:
            cfg = replace(cfg, noise=NoiseConfig(0.0, 0.0))
        if wd_dot_flag is not None:
            cfg = replace(cfg, gains=replace(cfg.gains, include_wd_dot=wd_dot_flag))
        if cutoff_hz is not None:
            cfg = replace(cfg, derivative_cutoff_hz=cutoff_hz)
        if use_true_w:
            cfg = replace(cfg, use_true_w=True)
        if actuation is not None:
            cfg = replace(cfg, actuation=actuation)
        if vis_flag is not None:
            cfg = replace(cfg, apply_visibility_correction=vis_flag)
        out = out_dir if out_dir is not None else _out_root() / label
    except ConfigInvalid as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)

    result = run_scenario(cfg)
    _write_outputs(result, out)
    if render:
        plot_trajectory(result.data, out / "trajectory.pdf")
        plot_time_series(result.data, out / "timeseries.pdf")
    click.echo(f"wrote {out / 'trajectory.csv'}")
    _echo_summary(result)
    if result.fault:
        sys.exit(3)


@main.command("plot")
@click.argument("csv_path", type=click.Path(path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Directory for the figures [default: alongside the CSV].")
@click.option("--format", "fmt", type=click.Choice(["pdf", "svg"]), default="pdf",
              show_default=True)
def cmd_plot(csv_path, out_dir, fmt) -> None:
    """Render the 3D-path and time-series figures from a trajectory CSV."""
    try:
        data = read_log_csv(csv_path)
    except (SchemaMismatch, OSError, ValueError) as e:
        click.echo(f"cannot read {csv_path}: {e}", err=True)
        sys.exit(2)
    out = out_dir if out_dir is not None else csv_path.parent
    out.mkdir(parents=True, exist_ok=True)
    p1 = plot_trajectory(data, out / f"trajectory.{fmt}")
    p2 = plot_time_series(data, out / f"timeseries.{fmt}")
    click.echo(f"wrote {p1}")
    click.echo(f"wrote {p2}")


def _set_path(d: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = d
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigInvalid(f"sweep path {dotted!r}: {k!r} is not a config section")
        node = node[k]
    node[keys[-1]] = value


@main.command("sweep")
@click.argument("base_scenario")
@click.argument("grid_json", type=click.Path(path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Output directory [default: $BATRACK_OUT_ROOT/sweep].")
@click.option("--jobs", type=int, default=os.cpu_count() or 1, show_default="cpu count",
              help="Worker processes.")
def cmd_sweep(base_scenario, grid_json, out_dir, jobs) -> None:
    """Run the Cartesian product of a parameter grid over a base scenario.

    The grid file is JSON: {"parameters": [{"path": "gains.k1",
    "values": [0.2, 0.4]}, ...]} where `path` is dotted into the scenario
    schema.  Each cell gets its own directory; summary.csv collects outcomes.
    Cells that fault are recorded, not fatal.
    """
    try:
        base, _ = _resolve_scenario(base_scenario)
        with open(grid_json) as f:
            grid = json.load(f)
        params = grid.get("parameters") if isinstance(grid, dict) else None
        if not isinstance(params, list) or not params:
            raise ConfigInvalid('grid file needs a non-empty "parameters" list')
        paths, value_lists = [], []
        for p in params:
            if not isinstance(p, dict) or "path" not in p or "values" not in p:
                raise ConfigInvalid('each grid entry needs "path" and "values"')
            if not isinstance(p["values"], list) or not p["values"]:
                raise ConfigInvalid(f'grid entry {p["path"]!r}: "values" must be a non-empty list')
            paths.append(str(p["path"]))
            value_lists.append(p["values"])
        configs = []
        for combo in itertools.product(*value_lists):
            d = base.to_dict()
            for dotted, value in zip(paths, combo):
                _set_path(d, dotted, value)
            configs.append(scenario_from_dict(d))
    except (ConfigInvalid, OSError, json.JSONDecodeError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)

    out = out_dir if out_dir is not None else _out_root() / "sweep"
    out.mkdir(parents=True, exist_ok=True)
    results = run_batch(configs, jobs=jobs)

    width = max(3, len(str(len(results) - 1)))
    combos = list(itertools.product(*value_lists))
    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as f:
        header = ["cell", *paths, "fault", "converged",
                  "final_err_bearing", "final_err_size", "final_err_velocity"]
        f.write(",".join(header) + "\n")
        for i, (combo, result) in enumerate(zip(combos, results)):
            cell = f"cell_{i:0{width}d}"
            _write_outputs(result, out / cell)
            diag = diagnostics(result)
            final = (
                [diag.err_bearing[-1], diag.err_size[-1], diag.err_velocity[-1]]
                if result.data.shape[0] else [float("nan")] * 3
            )
            vals = [json.dumps(v) if isinstance(v, (list, dict)) else format(v, ".17g")
                    if isinstance(v, float) else str(v) for v in combo]
            row = [cell, *vals, result.fault or "", str(diag.converged).lower(),
                   *[format(v, ".17g") for v in final]]
            f.write(",".join(row) + "\n")
            click.echo(f"{cell}: " + ("fault" if result.fault else f"converged={diag.converged}"))
    click.echo(f"wrote {summary_path}")


if __name__ == "__main__":
    main()
