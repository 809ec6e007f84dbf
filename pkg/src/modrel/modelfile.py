"""
YAML model files.

Probabilities are written as decimal strings holding the shortest repr of each
float, so reading a written file reproduces every value exactly.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from modrel.errors import ModelFileError
from modrel.model import (
    RESERVED_NAMES,
    BenignModel,
    InputCase,
    InputProfile,
    ModelKind,
    SystemModel,
    TestabilityProfile,
    ValidationReport,
    validate_benign_model,
    validate_input_profile,
    validate_system_model,
    validate_testability_profile,
)

logger = logging.getLogger(__name__)

SUPPORTED_VERSIONS = (1,)
TOP_LEVEL_KEYS = {"version", "kind", "modules", "control", "transitions", "testability", "benign", "inputs"}
TESTABILITY_KEYS = {"alpha0", "p", "n_tests", "q"}
BENIGN_KEYS = {"n_c", "p_SS", "p_SB", "p_B", "p_bb", "p_bS", "p_S", "p_F"}
INPUT_KEYS = {"id", "weight", "modules", "q_override"}


@dataclass(frozen=True)
class ModelFile:
    kind: ModelKind
    module_names: tuple[str, ...]
    inputs: InputProfile
    system: SystemModel | None = None
    benign: BenignModel | None = None
    testability: TestabilityProfile | None = None
    version: int = 1

    def validate(self) -> ValidationReport:
        n = len(self.module_names)
        if self.kind == ModelKind.BENIGN:
            report = validate_benign_model(self.benign)
        else:
            report = validate_system_model(self.system)
        if self.testability is not None:
            report = report + validate_testability_profile(self.testability, n)
        return report + validate_input_profile(self.inputs, n)


# ------------------------------------------------------------
# Field helpers
# ------------------------------------------------------------
def _mapping(value: Any, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ModelFileError(f"expected a mapping, got {type(value).__name__}", where)
    return value


def _check_keys(data: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(str(k) for k in data if k not in allowed)
    if unknown:
        raise ModelFileError(f"unknown field(s): {', '.join(unknown)}", where)


def _probability(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ModelFileError(f"expected a decimal probability, got {value!r}", where)
    try:
        return float(value)
    except ValueError:
        raise ModelFileError(f"'{value}' is not a decimal number", where) from None


def _count(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ModelFileError(f"expected a non-negative integer, got {value!r}", where)
    try:
        count = int(value)
    except ValueError:
        raise ModelFileError(f"'{value}' is not an integer", where) from None
    if count < 0:
        raise ModelFileError(f"count {count} is negative", where)
    return count


def _module(name: Any, index: dict[str, int], where: str) -> int:
    if name not in index:
        raise ModelFileError(f"unknown module '{name}'", where)
    return index[name]


def _module_names(data: dict) -> tuple[str, ...]:
    raw = data.get("modules")
    if not isinstance(raw, list) or not raw:
        raise ModelFileError("expected a non-empty list of module names", "modules")

    names: list[str] = []
    for i, name in enumerate(raw):
        where = f"modules[{i}]"
        if not isinstance(name, str) or not name:
            raise ModelFileError(f"module name must be a non-empty string, got {name!r}", where)
        if name in RESERVED_NAMES:
            raise ModelFileError(f"'{name}' is reserved and cannot name a module", where)
        if name in names:
            raise ModelFileError(f"module '{name}' is listed twice", where)
        names.append(name)

    control = data.get("control", names[0])
    if control not in names:
        raise ModelFileError(f"control module '{control}' is not listed in modules", "control")
    names.remove(control)
    return (control, *names)


def _matrix(raw: Any, index: dict[str, int], where: str, allow_exits: bool = False) -> tuple[np.ndarray, ...]:
    n = len(index)
    matrix = np.zeros((n, n))
    success = np.zeros(n)
    failure = np.zeros(n)
    for source, row in _mapping(raw, where).items():
        i = _module(source, index, f"{where}.{source}")
        for target, value in _mapping(row, f"{where}.{source}").items():
            cell = f"{where}.{source}.{target}"
            probability = _probability(value, cell)
            if allow_exits and target == "S":
                success[i] = probability
            elif allow_exits and target == "F":
                failure[i] = probability
            else:
                matrix[i, _module(target, index, cell)] = probability
    return matrix, success, failure


def _vector(raw: Any, index: dict[str, int], where: str) -> np.ndarray:
    values = np.zeros(len(index))
    for name, value in _mapping(raw, where).items():
        values[_module(name, index, f"{where}.{name}")] = _probability(value, f"{where}.{name}")
    return values


# ------------------------------------------------------------
# Sections
# ------------------------------------------------------------
def _parse_transitions(data: dict, names: tuple[str, ...], index: dict[str, int]) -> SystemModel:
    transfer, success, failure = _matrix(data.get("transitions"), index, "transitions", allow_exits=True)
    failing = np.flatnonzero(failure)
    if failing.size:
        raise ModelFileError(
            "failure probability comes from the testability block; remove the F destination",
            f"transitions.{names[failing[0]]}.F",
        )
    return SystemModel(names, transfer, success)


def _parse_testability(raw: Any, index: dict[str, int]) -> TestabilityProfile:
    n = len(index)
    alpha0 = np.zeros(n)
    testability = np.zeros(n)
    tests_passed = np.zeros(n, dtype=np.int64)
    revealability = np.ones(n)
    covered: set[int] = set()

    for name, entry in _mapping(raw, "testability").items():
        where = f"testability.{name}"
        i = _module(name, index, where)
        entry = _mapping(entry, where)
        _check_keys(entry, TESTABILITY_KEYS, where)
        if "alpha0" not in entry:
            raise ModelFileError("missing alpha0", where)
        alpha0[i] = _probability(entry["alpha0"], f"{where}.alpha0")
        testability[i] = _probability(entry.get("p", "0"), f"{where}.p")
        tests_passed[i] = _count(entry.get("n_tests", 0), f"{where}.n_tests")
        revealability[i] = _probability(entry.get("q", "1"), f"{where}.q")
        covered.add(i)

    missing = [name for name, i in index.items() if i not in covered]
    if missing:
        raise ModelFileError(f"no entry for module(s): {', '.join(missing)}", "testability")
    return TestabilityProfile(alpha0, testability, tests_passed, revealability)


def _parse_benign(raw: Any, names: tuple[str, ...], index: dict[str, int]) -> BenignModel:
    block = _mapping(raw, "benign")
    _check_keys(block, BENIGN_KEYS, "benign")
    if "n_c" not in block:
        raise ModelFileError("missing n_c", "benign")
    n_c = _count(block["n_c"], "benign.n_c")

    p_b_raw = block.get("p_B") or []
    if not isinstance(p_b_raw, list):
        raise ModelFileError("expected a list with one probability per benign level", "benign.p_B")

    return BenignModel(
        base_names=names,
        n_c=n_c,
        p_ss=_matrix(block.get("p_SS"), index, "benign.p_SS")[0],
        p_sb=_matrix(block.get("p_SB"), index, "benign.p_SB")[0],
        p_b=np.array([_probability(v, f"benign.p_B[{k}]") for k, v in enumerate(p_b_raw)]),
        p_bb=_matrix(block.get("p_bb"), index, "benign.p_bb")[0],
        p_bs=_matrix(block.get("p_bS"), index, "benign.p_bS")[0],
        success_exit=_vector(block.get("p_S"), index, "benign.p_S"),
        fail_exit=_vector(block.get("p_F"), index, "benign.p_F"),
    )


def parse_inputs(raw: Any, module_names: Sequence[str], where: str = "inputs") -> InputProfile:
    """Input cases in file schema; a missing section yields one unit-weight case over all modules."""
    if raw is None:
        return InputProfile.single(len(module_names))
    if not isinstance(raw, list) or not raw:
        raise ModelFileError("expected a non-empty list of input cases", where)

    index = {name: i for i, name in enumerate(module_names)}
    cases = []
    for k, entry in enumerate(raw):
        at = f"{where}[{k}]"
        entry = _mapping(entry, at)
        _check_keys(entry, INPUT_KEYS, at)
        case_id = entry.get("id")
        if not isinstance(case_id, str) or not case_id:
            raise ModelFileError(f"input id must be a non-empty string, got {case_id!r}", f"{at}.id")

        modules = entry.get("modules", list(module_names))
        if not isinstance(modules, list):
            raise ModelFileError("expected a list of module names", f"{at}.modules")
        executed = frozenset(_module(name, index, f"{at}.modules") for name in modules)
        overrides = {
            _module(name, index, f"{at}.q_override.{name}"): _probability(value, f"{at}.q_override.{name}")
            for name, value in _mapping(entry.get("q_override"), f"{at}.q_override").items()
        }
        weight = _probability(entry.get("weight", "1"), f"{at}.weight")
        cases.append(InputCase(case_id, weight, executed, overrides))
    return InputProfile(tuple(cases))


# ------------------------------------------------------------
# Reading
# ------------------------------------------------------------
def _load_yaml(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        location = f"line {mark.line + 1}" if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ModelFileError(f"malformed YAML: {problem}", location) from None


def parse_model(text: str) -> ModelFile:
    data = _load_yaml(text)
    if not isinstance(data, dict):
        raise ModelFileError("model file must contain a mapping at top level")
    _check_keys(data, TOP_LEVEL_KEYS, "model")

    version = data.get("version")
    if type(version) is not int or version not in SUPPORTED_VERSIONS:
        raise ModelFileError(f"unsupported version {version!r}; supported: {SUPPORTED_VERSIONS}", "version")

    try:
        kind = ModelKind(data.get("kind"))
    except ValueError:
        kind = None
    if kind not in (ModelKind.DEPENDENT, ModelKind.BENIGN):
        raise ModelFileError(f"kind must be 'dependent' or 'benign', got {data.get('kind')!r}", "kind")

    names = _module_names(data)
    index = {name: i for i, name in enumerate(names)}
    inputs = parse_inputs(data.get("inputs"), names)

    testability = None
    if data.get("testability") is not None:
        testability = _parse_testability(data["testability"], index)

    if kind == ModelKind.DEPENDENT:
        if "benign" in data:
            raise ModelFileError("only benign models carry a benign block", "benign")
        if testability is None:
            raise ModelFileError("dependent models need a testability block", "testability")
        system = _parse_transitions(data, names, index)
        return ModelFile(kind, names, inputs, system=system, testability=testability, version=version)

    if "transitions" in data:
        raise ModelFileError("benign models take their transitions from the benign block", "transitions")
    benign = _parse_benign(data.get("benign"), names, index)
    return ModelFile(kind, names, inputs, benign=benign, testability=testability, version=version)


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ModelFileError(f"not valid UTF-8: {e.reason}", f"{path} byte {e.start}") from None


def read_model(path: str | Path) -> ModelFile:
    path = Path(path)
    logger.info(f"Loading model from {path}")
    model = parse_model(_read_text(path))
    logger.info(f"Loaded {model.kind.value} model with {len(model.module_names)} modules")
    return model


def read_inputs(path: str | Path, module_names: Sequence[str]) -> InputProfile:
    """Input profile from any YAML mapping holding an `inputs` list, such as a model file."""
    data = _load_yaml(_read_text(Path(path)))
    if not isinstance(data, dict) or "inputs" not in data:
        raise ModelFileError("expected a mapping with an 'inputs' list", str(path))
    return parse_inputs(data["inputs"], module_names)


# ------------------------------------------------------------
# Writing
# ------------------------------------------------------------
def _decimal(value: float) -> str:
    return repr(float(value))


def _rows(matrix: np.ndarray, names: tuple[str, ...], exits: dict[str, np.ndarray] | None = None) -> dict:
    rows = {}
    for i, source in enumerate(names):
        row = {target: _decimal(matrix[i, j]) for j, target in enumerate(names) if matrix[i, j] != 0.0}
        for label, vector in (exits or {}).items():
            if vector[i] != 0.0:
                row[label] = _decimal(vector[i])
        rows[source] = row
    return rows


def _inputs_section(inputs: InputProfile, names: tuple[str, ...]) -> list[dict]:
    section = []
    for case in inputs.cases:
        entry: dict[str, Any] = {
            "id": case.id,
            "weight": _decimal(case.weight),
            "modules": [names[i] for i in sorted(case.executed_modules)],
        }
        if case.q_override:
            entry["q_override"] = {names[i]: _decimal(v) for i, v in sorted(case.q_override.items())}
        section.append(entry)
    return section


def dump_model(model: ModelFile) -> str:
    names = model.module_names
    data: dict[str, Any] = {
        "version": model.version,
        "kind": model.kind.value,
        "modules": list(names),
        "control": names[0],
    }

    if model.system is not None:
        data["transitions"] = _rows(model.system.transfer, names, {"S": model.system.success_exit})

    if model.testability is not None:
        profile = model.testability
        data["testability"] = {
            name: {
                "alpha0": _decimal(profile.alpha0[i]),
                "p": _decimal(profile.testability[i]),
                "n_tests": int(profile.tests_passed[i]),
                "q": _decimal(profile.revealability[i]),
            }
            for i, name in enumerate(names)
        }

    if model.benign is not None:
        benign = model.benign
        data["benign"] = {
            "n_c": benign.n_c,
            "p_SS": _rows(benign.p_ss, names),
            "p_SB": _rows(benign.p_sb, names),
            "p_B": [_decimal(v) for v in benign.p_b],
            "p_bb": _rows(benign.p_bb, names),
            "p_bS": _rows(benign.p_bs, names),
            "p_S": {name: _decimal(benign.success_exit[i]) for i, name in enumerate(names)},
            "p_F": {name: _decimal(benign.fail_exit[i]) for i, name in enumerate(names)},
        }

    data["inputs"] = _inputs_section(model.inputs, names)
    return yaml.safe_dump(data, default_flow_style=False, allow_unicode=True, sort_keys=False)


def write_model(model: ModelFile, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    logger.info(f"Writing model to {path}")
    path.write_text(dump_model(model), encoding="utf-8")
