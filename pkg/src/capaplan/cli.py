"""Command-line entry points: serve the API, replay scenarios, validate models."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .model import parse_model, validate_model
from .model.errors import ModelError
from .scenarios import (
    load_scenario,
    render_report_figure,
    run_scenario,
    run_suite,
    ScenarioReport,
)


@click.group()
def main() -> None:
    """Capability-based planning assistant."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="JSON config with model, provider, and workflow settings.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8420, show_default=True, type=int)
def serve(config_path: str, host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import app_from_config

    uvicorn.run(app_from_config(config_path), host=host, port=port)


@main.command()
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True))
@click.option("--reps", default=None, type=int,
              help="Override the per-category repetition count.")
def run(scenario_path: str, reps: int | None) -> None:
    """Replay a single scenario and report its verdict."""
    case = run_scenario(load_scenario(scenario_path), reps)
    click.echo(f"{case.scenario_id}: {case.verdict} "
               f"({len(case.repetitions)} repetition(s), agree={case.agree})")
    for i, rep in enumerate(case.repetitions, 1):
        click.echo(f"  rep {i}: {rep.verdict} — {rep.details}")
    sys.exit(0 if case.passed else 1)


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", default=".", show_default=True,
              type=click.Path(file_okay=False),
              help="Directory for the CSV report and figure.")
@click.option("--reps", default=None, type=int)
def suite(directory: str, out_dir: str, reps: int | None) -> None:
    """Run every scenario in DIRECTORY; write a CSV report and a figure."""
    report: ScenarioReport = run_suite(directory, reps)
    click.echo(report.table())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "scenario_report.csv"
    csv_path.write_text(report.to_csv(), encoding="utf-8")
    figure_path = out / "scenario_report.png"
    render_report_figure(report, figure_path)
    click.echo(f"report: {csv_path}")
    click.echo(f"figure: {figure_path}")
    sys.exit(0 if report.all_pass else 1)


@main.group()
def model() -> None:
    """Capability-model utilities."""


def _detect_format(text: str) -> str:
    return "json" if text.lstrip().startswith("{") else "turtle"


@model.command()
@click.argument("path", type=click.Path(exists=True))
def validate(path: str) -> None:
    """Parse and validate a capability model file (JSON or Turtle)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        m = parse_model(text, _detect_format(text))
        validate_model(m)
    except (ModelError, ValueError) as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(1)
    click.echo(
        f"valid: {len(m.resources)} resource(s), "
        f"{len(m.provided())} provided / {len(m.required())} required capabilities"
    )


@model.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--to", "fmt", type=click.Choice(["json", "turtle"]), required=True)
def convert(path: str, fmt: str) -> None:
    """Convert a model between the JSON and Turtle serializations."""
    from .model import serialize_model

    text = Path(path).read_text(encoding="utf-8")
    m = parse_model(text, _detect_format(text))
    click.echo(serialize_model(m, fmt), nl=False)
