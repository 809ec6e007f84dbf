import json
import logging
import sys
import traceback
from typing import NoReturn

import click
import yaml

from modrel.errors import DataError, FormatError, ModrelError, NumericalError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_FORMAT = 2
EXIT_NUMERICAL = 3

# Errors a command turns into an exit status instead of a traceback.
HANDLED_ERRORS = (ModrelError, OSError)


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (FormatError, OSError)):
        return EXIT_FORMAT
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(error, (DataError, ModrelError)):
        return EXIT_DATA
    raise error


def fail(error: BaseException, verbose: bool) -> NoReturn:
    logger.error(f"Error: {error}")
    if verbose:
        traceback.print_exc()
    sys.exit(exit_code_for(error))


def emit(data: dict, as_json: bool = False) -> None:
    if as_json:
        click.echo(json.dumps(data, indent=2))
    else:
        click.echo(yaml.safe_dump(data, default_flow_style=False, allow_unicode=True, sort_keys=False), nl=False)


def set_verbosity(verbose: bool) -> None:
    if verbose:
        logging.getLogger("modrel").setLevel(logging.DEBUG)
