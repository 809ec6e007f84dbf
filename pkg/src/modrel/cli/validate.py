import logging
import sys
from pathlib import Path

import click

from modrel.cli.common import EXIT_DATA, EXIT_OK, HANDLED_ERRORS, emit, fail, set_verbosity
from modrel.modelfile import read_model

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@click.command()
@click.argument("model_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging.")
def cli(model_path: Path, verbose: bool):
    """Check a model file against its probability constraints."""
    set_verbosity(verbose)

    try:
        model = read_model(model_path)
    except HANDLED_ERRORS as e:
        fail(e, verbose)

    report = model.validate()
    emit(report.to_dict())

    if not report.valid:
        for violation in report.violations:
            logger.error(f"[{violation.constraint}] {violation.message}")
        sys.exit(EXIT_DATA)

    logger.info(f"{model_path} is valid")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    cli()
