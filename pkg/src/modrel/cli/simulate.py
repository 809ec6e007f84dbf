import logging
from pathlib import Path

import click

from modrel.cli.common import HANDLED_ERRORS, emit, fail, set_verbosity
from modrel.errors import DataError
from modrel.logfile import write_log
from modrel.model import ModelKind
from modrel.modelfile import read_model
from modrel.reliability import FaultVector, pi_benign, success_probability
from modrel.simulate import (
    DEFAULT_MAX_STEPS,
    SimConfig,
    simulate_benign,
    simulate_dependent,
    simulate_dependent_with_log,
)

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@click.command()
@click.argument("model_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--runs", default=10000, show_default=True, type=click.IntRange(min=1), help="Number of simulated runs.")
@click.option("--seed", default=0, show_default=True, type=click.IntRange(0, 2**64 - 1), help="Master seed.")
@click.option("--input", "input_id", default=None, help="Input case whose fault vector drives a dependent model.")
@click.option("--max-steps", default=DEFAULT_MAX_STEPS, show_default=True, type=click.IntRange(min=1))
@click.option("--workers", default=1, show_default=True, type=click.IntRange(min=1), help="Worker processes.")
@click.option(
    "--log-output",
    default=None,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Write the observed transition counts as a test log (dependent models only).",
)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging.")
def cli(
    model_path: Path,
    runs: int,
    seed: int,
    input_id: str | None,
    max_steps: int,
    workers: int,
    log_output: Path | None,
    verbose: bool,
):
    """Simulate the model's chain and compare with the analytic success probability."""
    set_verbosity(verbose)
    cfg = SimConfig(runs=runs, seed=seed, max_steps=max_steps, workers=workers)

    try:
        model = read_model(model_path)
        model.validate().raise_if_invalid()
        case = model.inputs.get(input_id) if input_id is not None else model.inputs.cases[0]

        if model.kind == ModelKind.BENIGN:
            if log_output is not None:
                raise DataError("test logs can only be generated from dependent models")
            analytic = pi_benign(model.benign)
            stats = simulate_benign(model.benign, cfg)
        else:
            faults = FaultVector.from_profile(model.testability, case)
            analytic = success_probability(model.system, faults)
            if log_output is None:
                stats = simulate_dependent(model.system, faults, cfg)
            else:
                stats, log = simulate_dependent_with_log(model.system, faults, cfg)
                write_log(log, log_output)

    except HANDLED_ERRORS as e:
        fail(e, verbose)

    report = {"model_kind": model.kind.value, "input": case.id, "seed": seed}
    report.update(stats.to_dict())
    report["analytic"] = analytic
    report["z_score"] = stats.z_score(analytic)
    emit(report)


if __name__ == "__main__":
    cli()
