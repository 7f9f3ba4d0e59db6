import csv
import json
import sys

import typer
from rich.console import Console
from rich.table import Table

from homoglab.cli.utils import OutputFormat
from homoglab.scenarios import list_scenarios


def list_scenarios_command(
    filter_: str = typer.Argument("", metavar="FILTER", show_default=False, help="Only names containing this text."),
    output_format: OutputFormat = typer.Option(OutputFormat.pretty, "--format", "-f", help="Output format"),
):
    """List the available scenarios."""
    render(output_format, list_scenarios(filter_))


def render(format_: OutputFormat, scenarios):
    if format_ == OutputFormat.pretty:
        _render_pretty(scenarios)
    elif format_ == OutputFormat.json:
        _render_json(scenarios)
    elif format_ == OutputFormat.csv:
        _render_csv(scenarios)
    else:
        raise ValueError(f"Unknown format: {format_}")


def _render_pretty(scenarios):
    table = Table(title="Scenarios")

    table.add_column("Name", no_wrap=True)
    table.add_column("Description")

    for scenario in scenarios:
        table.add_row(scenario.name, scenario.description)
    Console().print(table)


def _render_csv(scenarios):
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["name", "description"])
    for scenario in scenarios:
        writer.writerow([scenario.name, scenario.description])


def _render_json(scenarios):
    typer.echo(json.dumps([{"name": s.name, "description": s.description} for s in scenarios], indent=2))
