import json

import typer

from homoglab.cli.utils import OutputFormat, fail
from homoglab.config import dumps_config
from homoglab.exceptions import ScenarioUnknown
from homoglab.reports import to_plain
from homoglab.scenarios import get_scenario


def describe(
    name: str = typer.Argument(..., show_default=False, help="The scenario name."),
    output_format: OutputFormat = typer.Option(OutputFormat.pretty, "--format", "-f", help="Output format"),
):
    """Show a scenario's description and its default configuration."""
    try:
        scenario = get_scenario(name)
    except ScenarioUnknown as e:
        fail(e)
    config = scenario.default_config()
    if output_format == OutputFormat.json:
        payload = {"name": scenario.name, "description": scenario.description, "defaults": config.to_dict()}
        typer.echo(json.dumps(to_plain(payload), indent=2, sort_keys=True))
    else:
        # the pretty form stays valid TOML so it can seed a config file
        typer.echo(f"# {scenario.name}: {scenario.description}")
        typer.echo(dumps_config(config))
