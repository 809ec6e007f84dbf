import os
from pathlib import Path

import numpy as np
import pytest

from modrel.model import BenignModel, SystemModel
from modrel.reliability import FaultVector

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_addoption(parser) -> None:
    parser.addoption(
        "--modrel-mc-runs",
        action="store",
        default=None,
        help="Value for MODREL_MC_RUNS (default: 100000).",
    )


def pytest_configure(config) -> None:
    mc_runs = config.getoption("--modrel-mc-runs")
    os.environ["MODREL_MC_RUNS"] = mc_runs or os.getenv("MODREL_MC_RUNS", "100000")


def random_system_model(rng: np.random.Generator, n: int, min_exit: float = 0.1) -> SystemModel:
    """Rows drawn from a Dirichlet with at least `min_exit` mass on success."""
    rows = rng.dirichlet(np.ones(n + 1), size=n)
    transfer = rows[:, :n] * (1.0 - min_exit)
    success_exit = min_exit + (1.0 - min_exit) * rows[:, n]
    return SystemModel(tuple(f"m{i}" for i in range(n)), transfer, success_exit)


def random_faults(rng: np.random.Generator, n: int, high: float = 0.3) -> FaultVector:
    return FaultVector.from_revealed(rng.uniform(0.0, high, size=n))


def random_benign_model(rng: np.random.Generator, n: int, n_c: int) -> BenignModel:
    shares = 0.8 * rng.dirichlet(np.ones(4), size=n) + 0.2 * np.array([0.0, 0.0, 0.5, 0.5])
    return BenignModel(
        base_names=tuple(f"m{i}" for i in range(n)),
        n_c=n_c,
        p_ss=shares[:, [0]] * rng.dirichlet(np.ones(n), size=n),
        p_sb=shares[:, [1]] * rng.dirichlet(np.ones(n), size=n),
        p_b=rng.dirichlet(np.ones(n_c)),
        p_bb=rng.dirichlet(np.ones(n), size=n),
        p_bs=rng.dirichlet(np.ones(n), size=n),
        success_exit=shares[:, 2],
        fail_exit=shares[:, 3],
    )


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def mc_runs() -> int:
    return int(os.getenv("MODREL_MC_RUNS", "100000"))


@pytest.fixture
def make_system_model():
    return random_system_model


@pytest.fixture
def make_faults():
    return random_faults


@pytest.fixture
def make_benign_model():
    return random_benign_model
