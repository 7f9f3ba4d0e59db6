from typing import Optional

import typer
from rich import print

from homoglab import __version__
from homoglab.cli import describe, list_scenarios_command, run
from homoglab.cli.utils import setup_logging

app = typer.Typer(
    rich_markup_mode="rich",
    context_settings={"help_option_names": ["-h", "--help"]},
)


app.command(context_settings={"ignore_unknown_options": False})(run)
app.command(context_settings={"ignore_unknown_options": False})(describe)
app.command("list", context_settings={"ignore_unknown_options": False})(list_scenarios_command)


def version_callback(value: bool):
    if value:
        print(f"homoglab version: {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    ctx: typer.Context,
    out: Optional[str] = typer.Option(
        None,
        "--out",
        "-o",
        metavar="HOMOGLAB_OUT",
        show_default=False,
        help="Output directory. This will override values from the config file and environment variables.",
    ),
    jobs: Optional[int] = typer.Option(
        None,
        "--jobs",
        "-j",
        metavar="HOMOGLAB_JOBS",
        min=1,
        show_default=False,
        help="Maximum number of worker threads. This will override the config file and environment variables.",
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log solver progress to stderr."),
    version: Optional[bool] = typer.Option(  # noqa
        None, "--version", callback=version_callback, is_eager=True, help="Show version"
    ),
):
    """
    Homogenization lab: cell problems, ε-sweeps and counter-examples
    """
    setup_logging(verbose)
    ctx.meta["overrides"] = {"output_dir": out, "jobs": jobs}


if __name__ == "__main__":
    app()
