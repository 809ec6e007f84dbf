import logging
from pathlib import Path

import click
import numpy as np

from modrel.cli.common import HANDLED_ERRORS, emit, fail, set_verbosity
from modrel.estimation import EstimateReport, estimate_parameters, estimate_reliability
from modrel.logfile import read_log
from modrel.model import ModelKind
from modrel.modelfile import ModelFile, read_inputs, read_model
from modrel.reliability import FaultVector

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


def _max_deviation(estimates: np.ndarray, truth: np.ndarray) -> float | None:
    defined = ~np.isnan(estimates)
    if not np.any(defined):
        return None
    return float(np.max(np.abs(estimates[defined] - truth[defined])))


def _deviation_from(report: EstimateReport, model: ModelFile) -> dict:
    """Largest absolute gaps between the estimates and the model the log is checked against."""
    revealed = FaultVector.from_profile(model.testability, model.inputs.cases[0]).revealed
    return {
        "transfer": _max_deviation(report.p_hat, model.system.transfer),
        "success_exit": _max_deviation(report.p_hat_s, model.system.success_exit),
        "alpha": _max_deviation(report.alpha_hat, revealed),
    }


@click.command()
@click.argument("log_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--model",
    "model_path",
    default=None,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Model file whose module names the log must use; estimates are compared against it.",
)
@click.option(
    "--inputs",
    "inputs_path",
    default=None,
    type=click.Path(dir_okay=False, path_type=Path),
    help="YAML file with an 'inputs' list; enables the reliability estimate.",
)
@click.option("--json", "as_json", is_flag=True, help="Emit machine-readable JSON.")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging.")
def cli(log_path: Path, model_path: Path | None, inputs_path: Path | None, as_json: bool, verbose: bool):
    """Estimate transfer and fault probabilities from a test log."""
    set_verbosity(verbose)

    try:
        model = read_model(model_path) if model_path is not None else None
        log = read_log(log_path, model.module_names if model is not None else None)
        report = estimate_parameters(log)
        output = report.to_dict()

        if model is not None and model.kind == ModelKind.DEPENDENT:
            output["deviation"] = _deviation_from(report, model)

        if inputs_path is not None:
            inputs = read_inputs(inputs_path, log.module_names)
            output["reliability"] = estimate_reliability(report, inputs).to_dict()

    except HANDLED_ERRORS as e:
        fail(e, verbose)

    emit(output, as_json=as_json)


if __name__ == "__main__":
    cli()
