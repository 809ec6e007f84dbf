"""
Maximum-likelihood estimation of dependent-model parameters from transition counts.

Transfer probabilities are conditioned on the module not failing, so they plug
straight into the (1 - alpha) scaled chain used by `reliability`.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from modrel.errors import EmptyLog, IncompleteEstimates, UnknownModule
from modrel.model import InputProfile, ModelKind, SystemModel
from modrel.reliability import FaultVector, ReliabilityResult, success_probability, system_reliability

logger = logging.getLogger(__name__)

SUCCESS = "S"
FAILURE = "F"

FLAG_NO_OBSERVATIONS = "no observations"
FLAG_ALL_FAILURES = "all observations failed; transfer row undefined"


@dataclass(frozen=True)
class TestLog:
    """Observed transitions out of every module: to other modules, to S and to F."""

    module_names: tuple[str, ...]
    transfers: np.ndarray
    to_success: np.ndarray
    to_failure: np.ndarray

    __test__ = False

    def __post_init__(self):
        names = tuple(self.module_names)
        n = len(names)
        object.__setattr__(self, "module_names", names)
        for attr, shape in (("transfers", (n, n)), ("to_success", (n,)), ("to_failure", (n,))):
            values = np.array(getattr(self, attr), dtype=np.int64)
            if values.shape != shape:
                raise ValueError(f"{attr} must have shape {shape}, got {values.shape}")
            if np.any(values < 0):
                raise ValueError(f"{attr} counts must be non-negative")
            values.setflags(write=False)
            object.__setattr__(self, attr, values)

    @classmethod
    def from_records(cls, module_names: Sequence[str], records: Iterable[tuple[str, str, int]]) -> "TestLog":
        """Accumulate `(from, to, count)` records; record order does not matter."""
        names = tuple(module_names)
        index = {name: i for i, name in enumerate(names)}
        n = len(names)
        transfers = np.zeros((n, n), dtype=np.int64)
        to_success = np.zeros(n, dtype=np.int64)
        to_failure = np.zeros(n, dtype=np.int64)

        for source, target, count in records:
            if source not in index:
                raise UnknownModule(f"log record from unknown module '{source}'")
            if count < 0:
                raise ValueError(f"negative count {count} for {source} -> {target}")
            i = index[source]
            if target == SUCCESS:
                to_success[i] += count
            elif target == FAILURE:
                to_failure[i] += count
            elif target in index:
                transfers[i, index[target]] += count
            else:
                raise UnknownModule(f"log record to unknown module '{target}'")

        return cls(names, transfers, to_success, to_failure)

    @property
    def size(self) -> int:
        return len(self.module_names)

    @property
    def observations(self) -> np.ndarray:
        return self.transfers.sum(axis=1) + self.to_success + self.to_failure

    @property
    def total(self) -> int:
        return int(self.observations.sum())

    def records(self) -> list[tuple[str, str, int]]:
        """Non-zero `(from, to, count)` records in module order."""
        rows = []
        for i, source in enumerate(self.module_names):
            for j, target in enumerate(self.module_names):
                if self.transfers[i, j]:
                    rows.append((source, target, int(self.transfers[i, j])))
            if self.to_success[i]:
                rows.append((source, SUCCESS, int(self.to_success[i])))
            if self.to_failure[i]:
                rows.append((source, FAILURE, int(self.to_failure[i])))
        return rows

    def merge(self, other: "TestLog") -> "TestLog":
        if other.module_names != self.module_names:
            raise ValueError("cannot merge logs over different modules")
        return TestLog(
            self.module_names,
            self.transfers + other.transfers,
            self.to_success + other.to_success,
            self.to_failure + other.to_failure,
        )


@dataclass(frozen=True)
class EstimateReport:
    """Estimates per module; rows without data hold NaN."""

    module_names: tuple[str, ...]
    p_hat: np.ndarray
    p_hat_s: np.ndarray
    alpha_hat: np.ndarray
    support: np.ndarray
    flags: Mapping[int, tuple[str, ...]] = field(default_factory=dict)

    def missing(self) -> list[int]:
        return [i for i in range(len(self.module_names)) if np.isnan(self.alpha_hat[i])]

    def reachable_from_control(self) -> list[int]:
        """Modules reachable from module 0 along transfers with a positive estimate."""
        seen = {0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            row = self.p_hat[i]
            for j in np.flatnonzero(np.nan_to_num(row, nan=0.0) > 0.0):
                if int(j) not in seen:
                    seen.add(int(j))
                    queue.append(int(j))
        return sorted(seen)

    def to_system_model(self) -> tuple[SystemModel, FaultVector]:
        """
        Plug-in model. Modules whose transfer row is undefined get a success exit of
        one; every such row is either unreachable or always fails (alpha_hat = 1),
        so the placeholder never carries probability.
        """
        reachable = self.reachable_from_control()
        lacking = [self.module_names[i] for i in reachable if i in self.missing()]
        if lacking:
            raise IncompleteEstimates(f"no observations for reachable module(s): {', '.join(lacking)}")

        n = len(self.module_names)
        transfer = np.nan_to_num(self.p_hat, nan=0.0)
        success_exit = np.nan_to_num(self.p_hat_s, nan=0.0)
        alpha = np.nan_to_num(self.alpha_hat, nan=0.0)
        for i in range(n):
            if np.isnan(self.p_hat_s[i]):
                transfer[i] = 0.0
                success_exit[i] = 1.0
        return SystemModel(self.module_names, transfer, success_exit), FaultVector.from_revealed(alpha)

    def to_dict(self) -> dict:
        def value(x: float) -> float | None:
            return None if np.isnan(x) else float(x)

        modules = {}
        for i, name in enumerate(self.module_names):
            modules[name] = {
                "support": int(self.support[i]),
                "alpha_hat": value(self.alpha_hat[i]),
                "p_hat_S": value(self.p_hat_s[i]),
                "p_hat": {
                    target: value(self.p_hat[i, j])
                    for j, target in enumerate(self.module_names)
                    if np.isnan(self.p_hat[i, j]) or self.p_hat[i, j] > 0.0
                },
                "flags": list(self.flags.get(i, ())),
            }
        return {"modules": modules}


def estimate_parameters(log: TestLog) -> EstimateReport:
    observations = log.observations
    if not np.any(observations > 0):
        raise EmptyLog("test log holds no observations")

    n = log.size
    p_hat = np.full((n, n), np.nan)
    p_hat_s = np.full(n, np.nan)
    alpha_hat = np.full(n, np.nan)
    flags: dict[int, tuple[str, ...]] = {}

    for i, name in enumerate(log.module_names):
        observed = int(observations[i])
        if observed == 0:
            flags[i] = (FLAG_NO_OBSERVATIONS,)
            logger.warning(f"Module '{name}' has no observations; estimates left undefined")
            continue

        failures = int(log.to_failure[i])
        alpha_hat[i] = failures / observed
        survived = observed - failures
        if survived == 0:
            flags[i] = (FLAG_ALL_FAILURES,)
            logger.warning(f"Module '{name}' failed in all {observed} observations")
            continue

        p_hat[i] = log.transfers[i] / survived
        p_hat_s[i] = log.to_success[i] / survived
        logger.debug(f"Module '{name}': {observed} observations, alpha_hat={alpha_hat[i]:.6g}")

    logger.info(f"Estimated parameters for {n} modules from {log.total} observations")
    return EstimateReport(log.module_names, p_hat, p_hat_s, alpha_hat, observations.copy(), flags)


def estimate_reliability(report: EstimateReport, inputs: InputProfile) -> ReliabilityResult:
    """
    Plug-in reliability estimate. The estimated revealed fault probabilities do
    not depend on the input, so every case gets the same success probability.
    """
    model, faults = report.to_system_model()
    pi_hat = success_probability(model, faults)
    per_input = {case.id: pi_hat for case in inputs.cases}
    system = system_reliability(per_input, inputs)
    logger.info(f"Estimated reliability over {len(per_input)} input(s): {system:.12g}")
    return ReliabilityResult(
        per_input=per_input,
        system=system,
        model_kind=ModelKind.DEPENDENT,
        weights={case.id: case.weight for case in inputs.cases},
    )
