import logging
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from modrel.errors import InvalidModel, NumericalError, UnknownInput

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9
RESERVED_NAMES = frozenset({"S", "F"})


class ModelKind(str, Enum):
    INDEPENDENT = "independent"
    DEPENDENT = "dependent"
    BENIGN = "benign"


def _frozen(values: npt.ArrayLike, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


def _square(name: str, values: npt.ArrayLike, n: int) -> np.ndarray:
    array = _frozen(values)
    if array.shape != (n, n):
        raise ValueError(f"{name} must have shape ({n}, {n}), got {array.shape}")
    return array


def _vector(name: str, values: npt.ArrayLike, n: int, dtype=np.float64) -> np.ndarray:
    array = _frozen(values, dtype=dtype)
    if array.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {array.shape}")
    return array


# ------------------------------------------------------------
# Validation reports
# ------------------------------------------------------------
@dataclass(frozen=True)
class Violation:
    constraint: str
    message: str
    row: int | None = None
    residual: float | None = None

    def to_dict(self) -> dict:
        return {
            "constraint": self.constraint,
            "row": self.row,
            "residual": self.residual,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def __add__(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.violations + other.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def summary(self) -> str:
        return "; ".join(v.message for v in self.violations)

    def raise_if_invalid(self) -> None:
        if not self.valid:
            raise InvalidModel(self)

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": [v.to_dict() for v in self.violations]}


class _Collector:
    def __init__(self):
        self.violations: list[Violation] = []

    def add(self, constraint: str, message: str, row: int | None = None, residual: float | None = None):
        self.violations.append(Violation(constraint, message, row, residual))

    def check_range(self, name: str, values: np.ndarray) -> None:
        bad = np.argwhere((values < 0.0) | (values > 1.0) | ~np.isfinite(values))
        for index in bad:
            where = ", ".join(str(int(i)) for i in index)
            value = float(values[tuple(index)])
            self.add("range", f"{name}[{where}] = {value:.12g} is outside [0, 1]", row=int(index[0]))

    def check_row_sums(self, constraint: str, label: str, totals: np.ndarray) -> None:
        for i, total in enumerate(totals):
            residual = float(total) - 1.0
            if abs(residual) > ROW_SUM_TOLERANCE:
                self.add(constraint, f"{label} row {i} sums to {float(total):.12g}", row=i, residual=residual)

    def check_names(self, names: Sequence[str]) -> None:
        seen: set[str] = set()
        for i, name in enumerate(names):
            if not name:
                self.add("module-names", f"module {i} has an empty name", row=i)
            elif name in RESERVED_NAMES:
                self.add("module-names", f"module name '{name}' is reserved", row=i)
            elif name in seen:
                self.add("module-names", f"module name '{name}' is duplicated", row=i)
            seen.add(name)

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self.violations))


# ------------------------------------------------------------
# Model types
# ------------------------------------------------------------
@dataclass(frozen=True)
class SystemModel:
    """
    Modules with control-transfer probabilities and success exits.

    The control module is always index 0; file loaders re-index a named control
    module to that position.
    """

    module_names: tuple[str, ...]
    transfer: np.ndarray
    success_exit: np.ndarray

    def __post_init__(self):
        names = tuple(self.module_names)
        if not names:
            raise ValueError("a system model needs at least one module")
        object.__setattr__(self, "module_names", names)
        object.__setattr__(self, "transfer", _square("transfer", self.transfer, len(names)))
        object.__setattr__(self, "success_exit", _vector("success_exit", self.success_exit, len(names)))

    @property
    def size(self) -> int:
        return len(self.module_names)

    @property
    def control_index(self) -> int:
        return 0

    def index_of(self, name: str) -> int:
        return self.module_names.index(name)


@dataclass(frozen=True)
class TestabilityProfile:
    alpha0: np.ndarray
    testability: np.ndarray
    tests_passed: np.ndarray
    revealability: np.ndarray

    __test__ = False

    def __post_init__(self):
        alpha0 = _frozen(self.alpha0)
        if alpha0.ndim != 1:
            raise ValueError(f"alpha0 must be a vector, got shape {alpha0.shape}")
        n = alpha0.shape[0]
        object.__setattr__(self, "alpha0", alpha0)
        object.__setattr__(self, "testability", _vector("testability", self.testability, n))
        object.__setattr__(self, "tests_passed", _vector("tests_passed", self.tests_passed, n, dtype=np.int64))
        object.__setattr__(self, "revealability", _vector("revealability", self.revealability, n))

    @property
    def size(self) -> int:
        return self.alpha0.shape[0]

    @classmethod
    def fault_free(cls, n: int) -> "TestabilityProfile":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n, dtype=np.int64), np.ones(n))


@dataclass(frozen=True)
class BenignModel:
    """Stable-state block plus n_c benign-failure levels over the same N modules."""

    base_names: tuple[str, ...]
    n_c: int
    p_ss: np.ndarray
    p_sb: np.ndarray
    p_b: np.ndarray
    p_bb: np.ndarray
    p_bs: np.ndarray
    success_exit: np.ndarray
    fail_exit: np.ndarray

    def __post_init__(self):
        names = tuple(self.base_names)
        if not names:
            raise ValueError("a benign model needs at least one module")
        n = len(names)
        object.__setattr__(self, "base_names", names)
        object.__setattr__(self, "n_c", int(self.n_c))
        for attr in ("p_ss", "p_sb", "p_bb", "p_bs"):
            object.__setattr__(self, attr, _square(attr, getattr(self, attr), n))
        object.__setattr__(self, "p_b", _frozen(self.p_b))
        object.__setattr__(self, "success_exit", _vector("success_exit", self.success_exit, n))
        object.__setattr__(self, "fail_exit", _vector("fail_exit", self.fail_exit, n))

    @property
    def size(self) -> int:
        return len(self.base_names)

    @property
    def transient_dim(self) -> int:
        return self.size * (self.n_c + 1)


@dataclass(frozen=True)
class InputCase:
    id: str
    weight: float = 1.0
    executed_modules: frozenset[int] = frozenset()
    q_override: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "executed_modules", frozenset(int(i) for i in self.executed_modules))
        object.__setattr__(self, "q_override", MappingProxyType({int(k): float(v) for k, v in self.q_override.items()}))

    def revealability(self, profile: TestabilityProfile) -> np.ndarray:
        q = profile.revealability.copy()
        for index, value in self.q_override.items():
            q[index] = value
        return q


@dataclass(frozen=True)
class InputProfile:
    cases: tuple[InputCase, ...]

    def __post_init__(self):
        object.__setattr__(self, "cases", tuple(self.cases))

    @classmethod
    def single(cls, n_modules: int, case_id: str = "default") -> "InputProfile":
        return cls((InputCase(case_id, 1.0, frozenset(range(n_modules))),))

    @property
    def total_weight(self) -> float:
        return float(sum(case.weight for case in self.cases))

    @property
    def ids(self) -> list[str]:
        return [case.id for case in self.cases]

    def get(self, case_id: str) -> InputCase:
        for case in self.cases:
            if case.id == case_id:
                return case
        raise UnknownInput(f"no input case with id '{case_id}'; available: {self.ids}")

    def restrict(self, case_ids: Iterable[str]) -> "InputProfile":
        return InputProfile(tuple(self.get(case_id) for case_id in case_ids))


# ------------------------------------------------------------
# Validation
# ------------------------------------------------------------
def validate_system_model(model: SystemModel) -> ValidationReport:
    collector = _Collector()
    collector.check_names(model.module_names)
    collector.check_range("transfer", model.transfer)
    collector.check_range("success_exit", model.success_exit)
    collector.check_row_sums("transfer-row-sum", "transfer", model.transfer.sum(axis=1) + model.success_exit)

    if not collector.violations:
        from modrel.chain import TransientMatrix, absorption_probability

        try:
            reached = absorption_probability(TransientMatrix(model.transfer), model.success_exit)
        except NumericalError as e:
            collector.add("success-reachable", f"success is unreachable from some modules: {e}")
        else:
            if reached < 1.0 - ROW_SUM_TOLERANCE:
                collector.add(
                    "success-reachable",
                    f"success is reached from the control module with probability {reached:.12g} < 1",
                    row=0,
                    residual=reached - 1.0,
                )

    report = collector.report()
    logger.debug(f"Validated system model with {model.size} modules: {len(report)} violation(s)")
    return report


def validate_benign_model(model: BenignModel) -> ValidationReport:
    collector = _Collector()
    collector.check_names(model.base_names)
    if model.n_c < 1:
        collector.add("benign-levels", f"benign threshold n_c = {model.n_c} must be at least 1")
    if model.p_b.shape != (model.n_c,):
        collector.add("benign-levels", f"p_B has {model.p_b.size} entries but n_c = {model.n_c}")

    for name in ("p_ss", "p_sb", "p_b", "p_bb", "p_bs", "success_exit", "fail_exit"):
        collector.check_range(name, getattr(model, name))

    stable_totals = (
        model.p_ss.sum(axis=1) + model.p_b.sum() * model.p_sb.sum(axis=1) + model.success_exit + model.fail_exit
    )
    collector.check_row_sums("stable-row-sum", "stable state", stable_totals)
    collector.check_row_sums("benign-descent-row-sum", "p_bb", model.p_bb.sum(axis=1))
    collector.check_row_sums("benign-return-row-sum", "p_bS", model.p_bs.sum(axis=1))

    if not collector.violations:
        from modrel.chain import absorption
        from modrel.reliability import build_benign_transient

        q_hat, exits = build_benign_transient(model)
        try:
            absorption(q_hat, exits)
        except NumericalError as e:
            collector.add("absorption-reachable", f"some states never reach S or F: {e}")

    report = collector.report()
    logger.debug(f"Validated benign model with {model.size} modules, n_c={model.n_c}: {len(report)} violation(s)")
    return report


def validate_testability_profile(profile: TestabilityProfile, n_modules: int | None = None) -> ValidationReport:
    collector = _Collector()
    if n_modules is not None and profile.size != n_modules:
        collector.add("testability-size", f"testability covers {profile.size} modules, model has {n_modules}")
    collector.check_range("alpha0", profile.alpha0)
    collector.check_range("testability", profile.testability)
    collector.check_range("revealability", profile.revealability)
    for i in np.flatnonzero(profile.tests_passed < 0):
        collector.add("range", f"tests_passed[{i}] = {profile.tests_passed[i]} is negative", row=int(i))
    return collector.report()


def validate_input_profile(
    inputs: InputProfile, n_modules: int, require_executed: bool = False
) -> ValidationReport:
    collector = _Collector()
    if not inputs.cases:
        collector.add("input-profile", "input profile has no cases")
        return collector.report()

    seen: set[str] = set()
    for row, case in enumerate(inputs.cases):
        if case.id in seen:
            collector.add("input-profile", f"input id '{case.id}' is duplicated", row=row)
        seen.add(case.id)
        if not case.weight >= 0.0:
            collector.add("input-weight", f"input '{case.id}' has negative weight {case.weight:.12g}", row=row)
        if require_executed and not case.executed_modules:
            collector.add("input-modules", f"input '{case.id}' executes no modules", row=row)
        for index in sorted(case.executed_modules):
            if not 0 <= index < n_modules:
                collector.add("input-modules", f"input '{case.id}' executes unknown module {index}", row=row)
        for index, value in case.q_override.items():
            if not 0 <= index < n_modules:
                collector.add("input-modules", f"input '{case.id}' overrides unknown module {index}", row=row)
            elif not 0.0 <= value <= 1.0:
                collector.add("range", f"input '{case.id}' q_override[{index}] = {value:.12g} is outside [0, 1]", row=row)

    if inputs.total_weight <= 0.0:
        collector.add("input-weight", "input weights are all zero")
    return collector.report()
