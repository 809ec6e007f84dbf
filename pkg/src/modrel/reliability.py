import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import numpy.typing as npt

from modrel.chain import TransientMatrix, absorption_probability
from modrel.errors import DegenerateUpdate, EmptyProfile, UnknownInput, UnknownModule
from modrel.model import BenignModel, InputCase, InputProfile, ModelKind, SystemModel, TestabilityProfile

logger = logging.getLogger(__name__)

DEGENERATE_DENOMINATOR = 1e-300
REVEALED_SLACK = 1e-15


# ------------------------------------------------------------
# Fault probabilities
# ------------------------------------------------------------
def fault_probability_after_tests(alpha0: float, testability: float, n_tests: int) -> float:
    """
    Posterior probability that a module still holds a fault after `n_tests` passed tests.

    A certain-fault prior (alpha0 == 1) cannot be updated once testing makes the
    surviving mass vanish; that case raises DegenerateUpdate.
    """
    if n_tests < 0:
        raise ValueError(f"n_tests must be non-negative, got {n_tests}")
    if n_tests == 0:
        return float(alpha0)

    surviving = alpha0 * (1.0 - testability) ** n_tests
    denominator = surviving + 1.0 - alpha0
    if denominator < DEGENERATE_DENOMINATOR:
        raise DegenerateUpdate(
            f"alpha0={alpha0} with testability={testability} after {n_tests} tests leaves no probability mass"
        )
    return float(min(max(surviving / denominator, 0.0), alpha0))


def revealed_fault(alpha: float, revealability: float) -> float:
    return float(revealability * alpha)


@dataclass(frozen=True)
class FaultVector:
    alpha: np.ndarray
    revealed: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=np.float64)
        revealed = np.array(self.revealed, dtype=np.float64)
        if alpha.ndim != 1 or alpha.shape != revealed.shape:
            raise ValueError(f"alpha and revealed must be vectors of equal length, got {alpha.shape}, {revealed.shape}")
        for name, values in (("alpha", alpha), ("revealed", revealed)):
            if np.any(values < 0.0) or np.any(values > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        if np.any(revealed > alpha + REVEALED_SLACK):
            raise ValueError("revealed fault probability cannot exceed the fault probability")
        alpha.setflags(write=False)
        revealed.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "revealed", revealed)

    @property
    def size(self) -> int:
        return self.alpha.shape[0]

    @classmethod
    def from_profile(cls, profile: TestabilityProfile, case: InputCase | None = None) -> "FaultVector":
        alpha = np.array(
            [
                fault_probability_after_tests(a0, p, int(n))
                for a0, p, n in zip(profile.alpha0, profile.testability, profile.tests_passed)
            ]
        )
        q = profile.revealability if case is None else _case_revealability(profile, case)
        revealed = np.array([revealed_fault(a, qi) for a, qi in zip(alpha, q)])
        return cls(alpha, revealed)

    @classmethod
    def from_revealed(cls, revealed: npt.ArrayLike) -> "FaultVector":
        """Fault vector where only the revealed probability is known (full revealability reading)."""
        values = np.asarray(revealed, dtype=np.float64)
        return cls(values, values)


def _case_revealability(profile: TestabilityProfile, case: InputCase) -> np.ndarray:
    for index in case.q_override:
        if not 0 <= index < profile.size:
            raise UnknownModule(f"input '{case.id}' overrides revealability of unknown module {index}")
    return case.revealability(profile)


# ------------------------------------------------------------
# Independent setup
# ------------------------------------------------------------
def pi_independent(profile: TestabilityProfile, case: InputCase) -> float:
    """Success probability when the executed modules fail independently."""
    for index in case.executed_modules:
        if not 0 <= index < profile.size:
            raise UnknownModule(f"input '{case.id}' executes unknown module {index}")

    faults = FaultVector.from_profile(profile, case)
    executed = sorted(case.executed_modules)
    return float(np.prod(1.0 - faults.revealed[executed]))


# ------------------------------------------------------------
# Dependent setup
# ------------------------------------------------------------
def build_dependent_transient(model: SystemModel, revealed: FaultVector) -> tuple[TransientMatrix, np.ndarray]:
    if revealed.size != model.size:
        raise ValueError(f"fault vector has {revealed.size} entries, model has {model.size} modules")
    survive = 1.0 - revealed.revealed
    q_hat = TransientMatrix(model.transfer * survive[:, None])
    return q_hat, model.success_exit * survive


def success_probability(model: SystemModel, faults: FaultVector) -> float:
    """Probability of absorption into S from the control module."""
    q_hat, exits = build_dependent_transient(model, faults)
    return absorption_probability(q_hat, exits)


def failure_probability(model: SystemModel, faults: FaultVector) -> float:
    q_hat, _ = build_dependent_transient(model, faults)
    return absorption_probability(q_hat, faults.revealed)


def pi_dependent(model: SystemModel, profile: TestabilityProfile, case: InputCase) -> float:
    return success_probability(model, FaultVector.from_profile(profile, case))


# ------------------------------------------------------------
# Benign / catastrophic setup
# ------------------------------------------------------------
def build_benign_transient(model: BenignModel) -> tuple[TransientMatrix, np.ndarray]:
    """
    Expanded transient block: level 0 is the stable state, levels 1..n_c the
    benign-failure depths. State index = level * N + module.
    """
    n = model.size
    levels = model.n_c + 1
    entries = np.zeros((levels * n, levels * n))

    entries[0:n, 0:n] = model.p_ss
    for k in range(1, levels):
        entries[0:n, k * n : (k + 1) * n] = model.p_sb * model.p_b[k - 1]
    entries[n : 2 * n, 0:n] = model.p_bs
    for k in range(2, levels):
        entries[k * n : (k + 1) * n, (k - 1) * n : k * n] = model.p_bb

    exits = np.zeros(levels * n)
    exits[0:n] = model.success_exit
    return TransientMatrix(entries), exits


def benign_failure_exits(model: BenignModel) -> np.ndarray:
    exits = np.zeros(model.transient_dim)
    exits[0 : model.size] = model.fail_exit
    return exits


def pi_benign(model: BenignModel) -> float:
    q_hat, exits = build_benign_transient(model)
    return absorption_probability(q_hat, exits)


def benign_from_dependent(model: SystemModel, faults: FaultVector) -> BenignModel:
    """Embed a dependent model as a benign model whose benign levels are never entered."""
    survive = 1.0 - faults.revealed
    n = model.size
    return BenignModel(
        base_names=model.module_names,
        n_c=1,
        p_ss=model.transfer * survive[:, None],
        p_sb=np.zeros((n, n)),
        p_b=np.zeros(1),
        p_bb=np.eye(n),
        p_bs=np.eye(n),
        success_exit=model.success_exit * survive,
        fail_exit=faults.revealed,
    )


# ------------------------------------------------------------
# System reliability
# ------------------------------------------------------------
@dataclass(frozen=True)
class ReliabilityResult:
    per_input: Mapping[str, float]
    system: float
    model_kind: ModelKind
    weights: Mapping[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_input": dict(self.per_input),
            "system": self.system,
            "model_kind": self.model_kind.value,
        }


def system_reliability(per_input: Mapping[str, float], profile: InputProfile) -> float:
    """Weighted mean of per-input success probabilities; unit weights give the plain average."""
    total = profile.total_weight
    if not profile.cases or total <= 0.0:
        raise EmptyProfile("input profile has no cases with positive weight")

    weighted = 0.0
    for case in profile.cases:
        if case.id not in per_input:
            raise UnknownInput(f"no success probability for input '{case.id}'")
        weighted += case.weight * per_input[case.id]
    return float(min(max(weighted / total, 0.0), 1.0))


def _result(per_input: dict[str, float], inputs: InputProfile, kind: ModelKind) -> ReliabilityResult:
    system = system_reliability(per_input, inputs)
    logger.info(f"System reliability ({kind.value}) over {len(per_input)} input(s): {system:.12g}")
    return ReliabilityResult(
        per_input=per_input,
        system=system,
        model_kind=kind,
        weights={case.id: case.weight for case in inputs.cases},
    )


def evaluate_independent(profile: TestabilityProfile, inputs: InputProfile) -> ReliabilityResult:
    per_input = {case.id: pi_independent(profile, case) for case in inputs.cases}
    return _result(per_input, inputs, ModelKind.INDEPENDENT)


def evaluate_dependent(model: SystemModel, profile: TestabilityProfile, inputs: InputProfile) -> ReliabilityResult:
    per_input = {}
    for case in inputs.cases:
        per_input[case.id] = pi_dependent(model, profile, case)
        logger.debug(f"Input '{case.id}': pi = {per_input[case.id]:.12g}")
    return _result(per_input, inputs, ModelKind.DEPENDENT)


def evaluate_benign(model: BenignModel, inputs: InputProfile) -> ReliabilityResult:
    pi = pi_benign(model)
    return _result({case.id: pi for case in inputs.cases}, inputs, ModelKind.BENIGN)
