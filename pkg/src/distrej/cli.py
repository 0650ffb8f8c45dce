"""Command-line entry point: ``distrej run | compare | sweep | scenarios``."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import click
import yaml

from .errors import DistRejError
from .scenario import (
    CONTROLLERS,
    OUTPUT_DIR_ENV,
    bundled_scenarios,
    compare_report,
    default_output_dir,
    export_report,
    export_trace,
    load_report,
    load_scenario,
    run_scenario,
    sweep,
    _atomic_write,
)


def _fail(exc: Exception):
    raise click.ClickException(str(exc)) from exc


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Disturbance estimation and rejection scenarios for robot arms."""


@main.command()
@click.argument("scenario_file")
@click.option("--controller", type=click.Choice(CONTROLLERS), default=None,
              help="Override the controller named in the scenario file.")
@click.option("--seed", type=int, default=None, help="Override the noise seed.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help=f"Output directory (default: ${OUTPUT_DIR_ENV} or ./distrej-out).")
def run(scenario_file, controller, seed, out_dir):
    """Run SCENARIO_FILE and write its trace CSV and RMSE report JSON."""
    try:
        cfg = load_scenario(scenario_file)
        overrides = {}
        if controller is not None:
            overrides["controller"] = controller
        if seed is not None:
            overrides["seed"] = seed
        if overrides:
            cfg = cfg.with_overrides(**overrides)
        trace, report = run_scenario(cfg)
        out = Path(out_dir) if out_dir else default_output_dir()
        stem = f"{cfg.name}-{cfg.controller}-seed{cfg.seed}"
        trace_path = export_trace(trace, out / f"{stem}.csv")
        report_path = export_report(report, out / f"{stem}.json")
    except DistRejError as exc:
        _fail(exc)
    click.echo(f"scenario {cfg.name}  controller {cfg.controller}  seed {cfg.seed}  steps {len(trace)}")
    click.echo("rmse_e [rad]: " + " ".join(f"{v:.6g}" for v in report.rmse_e))
    click.echo(f"trace:  {trace_path}")
    click.echo(f"report: {report_path}")


@main.command()
@click.argument("report_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("report_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Print the machine-readable summary.")
def compare(report_a, report_b, as_json):
    """Per-joint RMSE comparison of two reports from the same scenario."""
    try:
        summary = compare_report(load_report(report_a), load_report(report_b))
    except DistRejError as exc:
        _fail(exc)
    if as_json:
        click.echo(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    else:
        click.echo(summary.to_text(), nl=False)


def _parse_values(text: str):
    values = [yaml.safe_load(v) for v in text.split(",") if v.strip()]
    if not values:
        raise click.BadParameter("at least one value is required", param_hint="--values")
    return values


@main.command("sweep")
@click.argument("scenario_file")
@click.option("--param", required=True, help="Dotted scenario key, e.g. sensor.sigma_qd.")
@click.option("--values", "values_text", required=True, help="Comma-separated values, e.g. 0.01,0.03,0.1.")
@click.option("--seeds", type=int, default=1, show_default=True, help="Seeds per value (seed, seed+1, ...).")
@click.option("--workers", type=int, default=1, show_default=True, help="Parallel worker processes.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help=f"Output directory (default: ${OUTPUT_DIR_ENV} or ./distrej-out).")
def sweep_cmd(scenario_file, param, values_text, seeds, workers, out_dir):
    """Re-run SCENARIO_FILE over values of one parameter and tabulate estimation errors."""
    values = _parse_values(values_text)
    try:
        cfg = load_scenario(scenario_file)
        rows = sweep(cfg, param, values, seeds=range(cfg.seed, cfg.seed + seeds), max_workers=workers)
        out = Path(out_dir) if out_dir else default_output_dir()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        path = out / f"{cfg.name}-sweep-{param.replace('.', '_')}.csv"
        _atomic_write(path, buf.getvalue())
    except DistRejError as exc:
        _fail(exc)
    has_base = "rms_d_err_baseline_mean" in rows[0]
    click.echo(f"{param:>16}  {'seed':>4}  {'rms d err':>10}" + (f"  {'baseline':>10}" if has_base else ""))
    for row in rows:
        line = f"{row['value']!s:>16}  {row['seed']:>4}  {row['rms_d_err_mean']:>10.4g}"
        if has_base:
            line += f"  {row['rms_d_err_baseline_mean']:>10.4g}"
        click.echo(line)
    click.echo(f"table: {path}")


@main.command("scenarios")
def list_scenarios():
    """List the bundled scenario files."""
    for path in bundled_scenarios():
        click.echo(path.stem)


if __name__ == "__main__":  # pragma: no cover
    main()
