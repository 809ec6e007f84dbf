"""
Seeded path simulation of the absorbing chains.

Every run draws from its own Philox stream keyed by the master seed with the
run index in the counter, so a run's path depends only on (seed, run index).
Splitting the run range across workers therefore reproduces the sequential
result exactly.
"""

import logging
import math
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce

import numpy as np

from modrel.estimation import TestLog
from modrel.model import BenignModel, SystemModel
from modrel.reliability import FaultVector, benign_failure_exits, build_benign_transient, build_dependent_transient

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 10**6
UNIFORM_BATCH = 32


@dataclass(frozen=True)
class SimConfig:
    runs: int
    seed: int = 0
    max_steps: int = DEFAULT_MAX_STEPS
    workers: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"runs must be at least 1, got {self.runs}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be at least 1, got {self.max_steps}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")


@dataclass(frozen=True)
class SimStats:
    runs: int
    successes: int
    failures: int
    truncated: int
    steps: int = 0

    @property
    def pi_hat(self) -> float:
        return self.successes / self.runs

    @property
    def stderr(self) -> float:
        return math.sqrt(self.pi_hat * (1.0 - self.pi_hat) / self.runs)

    def z_score(self, analytic: float, tolerance: float = 1e-12) -> float:
        difference = self.pi_hat - analytic
        if abs(difference) <= tolerance:
            return 0.0
        if self.stderr == 0.0:
            return math.copysign(math.inf, difference)
        return difference / self.stderr

    def merge(self, other: "SimStats") -> "SimStats":
        return SimStats(
            runs=self.runs + other.runs,
            successes=self.successes + other.successes,
            failures=self.failures + other.failures,
            truncated=self.truncated + other.truncated,
            steps=self.steps + other.steps,
        )

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "successes": self.successes,
            "failures": self.failures,
            "truncated": self.truncated,
            "steps": self.steps,
            "pi_hat": self.pi_hat,
            "stderr": self.stderr,
        }


# ------------------------------------------------------------
# Chain tables
# ------------------------------------------------------------
@dataclass(frozen=True)
class _Chain:
    """Cumulative rows over destinations [transient states..., S, F]."""

    cumulative: tuple[tuple[float, ...], ...]

    @property
    def n_transient(self) -> int:
        return len(self.cumulative)

    @classmethod
    def from_blocks(cls, q_hat: np.ndarray, success: np.ndarray, failure: np.ndarray) -> "_Chain":
        rows = np.hstack([q_hat, success[:, None], failure[:, None]])
        cumulative = np.cumsum(rows, axis=1)
        # rows that lose mass to rounding still end exactly at 1
        cumulative /= cumulative[:, -1:]
        return cls(tuple(tuple(row) for row in cumulative.tolist()))


def _dependent_chain(model: SystemModel, revealed: FaultVector) -> _Chain:
    q_hat, exits = build_dependent_transient(model, revealed)
    return _Chain.from_blocks(q_hat.entries, exits, revealed.revealed)


def _benign_chain(model: BenignModel) -> _Chain:
    q_hat, exits = build_benign_transient(model)
    failure = benign_failure_exits(model)
    # benign rows are stochastic on their own; any rounding residue goes to F
    residue = np.clip(1.0 - q_hat.entries.sum(axis=1) - exits - failure, 0.0, None)
    residue[: model.size] = 0.0
    return _Chain.from_blocks(q_hat.entries, exits, failure + residue)


def _run_stream(seed: int, run_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, run_index, 0, 0]))


def _simulate_range(
    chain: _Chain, seed: int, start: int, stop: int, max_steps: int, tally: bool
) -> tuple[SimStats, np.ndarray | None]:
    n = chain.n_transient
    success_state = n
    failure_state = n + 1
    counts = [[0] * (n + 2) for _ in range(n)] if tally else None

    successes = failures = truncated = steps = 0
    for run_index in range(start, stop):
        stream = _run_stream(seed, run_index)
        uniforms: list[float] = []
        state = 0
        taken = 0
        while True:
            if taken >= max_steps:
                truncated += 1
                break
            if not uniforms:
                uniforms = stream.random(UNIFORM_BATCH).tolist()[::-1]
            target = bisect_right(chain.cumulative[state], uniforms.pop())
            taken += 1
            if counts is not None:
                counts[state][target] += 1
            if target == success_state:
                successes += 1
                break
            if target == failure_state:
                failures += 1
                break
            state = target
        steps += taken

    stats = SimStats(stop - start, successes, failures, truncated, steps)
    return stats, (np.array(counts, dtype=np.int64) if counts is not None else None)


def _partition(runs: int, workers: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, runs, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _simulate(chain: _Chain, cfg: SimConfig, tally: bool) -> tuple[SimStats, np.ndarray | None]:
    if cfg.workers == 1:
        parts = [_simulate_range(chain, cfg.seed, 0, cfg.runs, cfg.max_steps, tally)]
    else:
        ranges = _partition(cfg.runs, cfg.workers)
        logger.debug(f"Simulating {cfg.runs} runs across {len(ranges)} workers")
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(_simulate_range, chain, cfg.seed, start, stop, cfg.max_steps, tally)
                for start, stop in ranges
            ]
            parts = [future.result() for future in futures]

    stats = reduce(SimStats.merge, (part[0] for part in parts))
    counts = sum(part[1] for part in parts) if tally else None

    if stats.truncated:
        logger.warning(f"{stats.truncated} of {stats.runs} runs hit max_steps={cfg.max_steps} without absorbing")
    logger.info(f"Simulated {stats.runs} runs: pi_hat={stats.pi_hat:.6g} (stderr {stats.stderr:.3g})")
    return stats, counts


# ------------------------------------------------------------
# Public entry points
# ------------------------------------------------------------
def simulate_dependent(model: SystemModel, revealed: FaultVector, cfg: SimConfig) -> SimStats:
    stats, _ = _simulate(_dependent_chain(model, revealed), cfg, tally=False)
    return stats


def simulate_benign(model: BenignModel, cfg: SimConfig) -> SimStats:
    stats, _ = _simulate(_benign_chain(model), cfg, tally=False)
    return stats


def generate_log(model: SystemModel, revealed: FaultVector, cfg: SimConfig) -> TestLog:
    """Simulate the dependent chain and tally every transition taken."""
    return simulate_dependent_with_log(model, revealed, cfg)[1]


def simulate_dependent_with_log(model: SystemModel, revealed: FaultVector, cfg: SimConfig) -> tuple[SimStats, TestLog]:
    stats, counts = _simulate(_dependent_chain(model, revealed), cfg, tally=True)
    n = model.size
    return stats, TestLog(model.module_names, counts[:, :n], counts[:, n], counts[:, n + 1])
