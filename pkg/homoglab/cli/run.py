import csv
import json
import sys
from pathlib import Path

import typer
from rich import print
from rich.console import Console
from rich.table import Table

from homoglab.cli.utils import OutputFormat, fail
from homoglab.config import ScenarioConfig, load_config
from homoglab.exceptions import ConfigInvalid
from homoglab.reports import relative
from homoglab.scenarios import run_scenario


def run(
    ctx: typer.Context,
    config_path: str = typer.Argument(
        ...,
        metavar="CONFIG",
        show_default=False,
        help="A TOML scenario file, or the name of a scenario to run with its defaults.",
    ),
    output_format: OutputFormat = typer.Option(OutputFormat.pretty, "--format", "-f", help="Output format"),
):
    """Run a scenario and write its reports.

    The JSON summary, CSV tables, plot data and the resolved config.toml are written to
    the output directory.

    Example:

        [on black]homoglab run harmonic-1d --out results/harmonic[/]
    """
    overrides = ctx.meta.get("overrides", {})
    try:
        config = _load(config_path, **overrides)
        outcome = run_scenario(config)
    except Exception as e:
        fail(e)

    files = relative(outcome.files, outcome.directory)
    if output_format == OutputFormat.json:
        payload = {"scenario": config.scenario, "directory": str(outcome.directory), "files": files}
        typer.echo(json.dumps(payload, indent=2, sort_keys=True))
    elif output_format == OutputFormat.csv:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["scenario", "file"])
        for name in files:
            writer.writerow([config.scenario, str(outcome.directory / name)])
    else:
        table = Table(title=f"Scenario: {config.scenario}")
        table.add_column("Report", no_wrap=True)
        for name in files:
            table.add_row(name)
        Console().print(table)
        print(f"Reports written to [green]{outcome.directory}[/green]")


def _load(config_path: str, **overrides) -> ScenarioConfig:
    path = Path(config_path)
    if path.is_file():
        return load_config(path, **overrides)
    if path.suffix == ".toml":
        raise ConfigInvalid(f"config file {config_path} does not exist", key="config")
    # a bare scenario name runs with the scenario defaults; unknown names are reported by the registry
    return ScenarioConfig.from_dict({"scenario": config_path}, **overrides)
