import logging
from pathlib import Path

import click

from modrel.cli.common import HANDLED_ERRORS, emit, fail, set_verbosity
from modrel.errors import DataError
from modrel.model import ModelKind, validate_input_profile
from modrel.modelfile import read_model
from modrel.reliability import evaluate_benign, evaluate_dependent, evaluate_independent

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@click.command()
@click.argument("model_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--input", "input_id", default=None, help="Evaluate only the input case with this id.")
@click.option("--json", "as_json", is_flag=True, help="Emit machine-readable JSON.")
@click.option(
    "--independent",
    is_flag=True,
    help="Treat executed modules as failing independently instead of following control transfers.",
)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging.")
def cli(model_path: Path, input_id: str | None, as_json: bool, independent: bool, verbose: bool):
    """Compute per-input success probabilities and system reliability."""
    set_verbosity(verbose)

    try:
        model = read_model(model_path)
        model.validate().raise_if_invalid()

        inputs = model.inputs if input_id is None else model.inputs.restrict([input_id])

        if independent:
            if model.testability is None:
                raise DataError("the independent setup needs a testability block")
            validate_input_profile(inputs, len(model.module_names), require_executed=True).raise_if_invalid()
            result = evaluate_independent(model.testability, inputs)
        elif model.kind == ModelKind.BENIGN:
            result = evaluate_benign(model.benign, inputs)
        else:
            result = evaluate_dependent(model.system, model.testability, inputs)

    except HANDLED_ERRORS as e:
        fail(e, verbose)

    emit(result.to_dict(), as_json=as_json)


if __name__ == "__main__":
    cli()
