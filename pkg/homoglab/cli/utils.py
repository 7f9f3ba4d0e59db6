import json
import logging
from enum import Enum

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from homoglab.exceptions import ConfigurationError, HomoglabException, ScenarioUnknown

log = logging.getLogger("homoglab")

err_console = Console(stderr=True)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class OutputFormat(str, Enum):
    pretty = "pretty"
    json = "json"
    csv = "csv"


def setup_logging(verbose: bool):
    logger = logging.getLogger("homoglab")
    if not verbose:
        logger.setLevel(logging.WARNING)
        return
    logger.setLevel(logging.DEBUG)
    if not any(isinstance(handler, RichHandler) for handler in logger.handlers):
        logger.addHandler(RichHandler(console=err_console, show_path=False))


def error_payload(error: Exception) -> dict:
    payload = {
        "error": type(error).__name__,
        "module": getattr(error, "module", None),
        "message": str(error),
    }
    if isinstance(error, ScenarioUnknown):
        payload["registry"] = error.registry
    key = getattr(error, "key", None)
    if key is not None:
        payload["key"] = key
    return payload


def fail(error: Exception):
    """Print the machine-readable error on stdout and exit with the code for its category.

    Anything that is not a configuration error counts as a numerical failure.
    """
    if not isinstance(error, (ConfigurationError, HomoglabException)):
        log.debug("unexpected error", exc_info=error)
    code = EXIT_CONFIG if isinstance(error, ConfigurationError) else EXIT_NUMERICAL
    typer.echo(json.dumps(error_payload(error), sort_keys=True))
    err_console.print(f"[red]{type(error).__name__}: {escape(str(error))}[/red]", highlight=False)
    raise typer.Exit(code=code)
