import numpy as np
import pytest

from modrel.errors import ModelFileError
from modrel.model import ModelKind
from modrel.modelfile import dump_model, parse_model, read_inputs, read_model, write_model

FIXTURE_MODELS = ["two_module.yaml", "single_loop.yaml", "two_inputs.yaml", "benign_worked.yaml"]

REORDERED = """
version: 1
kind: dependent
modules: [worker, control]
control: control
transitions:
  control: {worker: "0.5", S: "0.5"}
  worker: {S: "1"}
testability:
  control: {alpha0: "0.1"}
  worker: {alpha0: "0.2"}
"""


def _same(left, right) -> None:
    for attr in ("transfer", "success_exit"):
        if left.system is not None:
            np.testing.assert_array_equal(getattr(left.system, attr), getattr(right.system, attr))
    if left.testability is not None:
        for attr in ("alpha0", "testability", "tests_passed", "revealability"):
            np.testing.assert_array_equal(getattr(left.testability, attr), getattr(right.testability, attr))
    if left.benign is not None:
        for attr in ("p_ss", "p_sb", "p_b", "p_bb", "p_bs", "success_exit", "fail_exit"):
            np.testing.assert_array_equal(getattr(left.benign, attr), getattr(right.benign, attr))


def test_read_two_module_model(fixtures_dir) -> None:
    model = read_model(fixtures_dir / "two_module.yaml")

    assert model.kind == ModelKind.DEPENDENT
    assert model.module_names == ("control", "worker")
    assert model.system.transfer.tolist() == [[0.0, 0.5], [0.0, 0.0]]
    assert model.system.success_exit.tolist() == [0.5, 1.0]
    assert model.testability.alpha0.tolist() == [0.1, 0.2]
    assert model.inputs.ids == ["nominal"]
    assert model.validate().valid


def test_control_module_is_moved_to_index_zero() -> None:
    model = parse_model(REORDERED)

    assert model.module_names == ("control", "worker")
    assert model.system.transfer[0, 1] == 0.5
    assert model.system.success_exit.tolist() == [0.5, 1.0]


def test_testability_defaults() -> None:
    profile = parse_model(REORDERED).testability

    assert profile.testability.tolist() == [0.0, 0.0]
    assert profile.tests_passed.tolist() == [0, 0]
    assert profile.revealability.tolist() == [1.0, 1.0]


def test_missing_inputs_become_one_default_case() -> None:
    inputs = parse_model(REORDERED).inputs

    (case,) = inputs.cases
    assert case.id == "default"
    assert case.weight == 1.0
    assert case.executed_modules == {0, 1}


def test_input_overrides_are_indexed_by_module(fixtures_dir) -> None:
    inputs = read_model(fixtures_dir / "two_inputs.yaml").inputs

    assert inputs.ids == ["light", "heavy"]
    assert dict(inputs.get("light").q_override) == {0: 0.5}
    assert not inputs.get("heavy").q_override


def test_benign_model_is_read(fixtures_dir) -> None:
    model = read_model(fixtures_dir / "benign_worked.yaml")

    assert model.kind == ModelKind.BENIGN
    assert model.system is None
    assert model.benign.n_c == 1
    assert model.benign.p_b.tolist() == [0.3]
    assert model.validate().valid


@pytest.mark.parametrize("name", FIXTURE_MODELS)
def test_written_models_read_back_exactly(fixtures_dir, tmp_path, name) -> None:
    original = read_model(fixtures_dir / name)
    path = tmp_path / "nested" / name

    write_model(original, path)
    restored = read_model(path)

    assert restored.kind == original.kind
    assert restored.module_names == original.module_names
    assert restored.inputs == original.inputs
    _same(original, restored)


def test_dump_keeps_awkward_decimals_exact() -> None:
    text = REORDERED.replace('"0.1"', '"0.30000000000000004"')

    restored = parse_model(dump_model(parse_model(text)))

    assert restored.testability.alpha0[0] == 0.1 + 0.2


def test_invalid_row_sum_parses_but_does_not_validate(fixtures_dir) -> None:
    report = read_model(fixtures_dir / "invalid_row_sum.yaml").validate()

    assert [v.constraint for v in report.violations] == ["transfer-row-sum"]


def test_invalid_benign_parses_but_does_not_validate(fixtures_dir) -> None:
    report = read_model(fixtures_dir / "invalid_benign.yaml").validate()

    assert [v.constraint for v in report.violations] == ["stable-row-sum"]


def test_malformed_yaml_reports_a_line(fixtures_dir) -> None:
    with pytest.raises(ModelFileError, match="line"):
        read_model(fixtures_dir / "malformed.yaml")


@pytest.mark.parametrize(
    "edit, location",
    [
        (("version: 1", "version: 2"), "version"),
        (("kind: dependent", "kind: independent"), "kind"),
        (("modules: [worker, control]", "modules: [worker, S]"), "modules[1]"),
        (("control: control\n", "control: boss\n"), "control"),
        (('worker: {S: "1"}', 'worker: {S: "0.9", F: "0.1"}'), "transitions.worker.F"),
        (('worker: {S: "1"}', 'worker: {S: "one"}'), "transitions.worker.S"),
        (('worker: {S: "1"}', 'ghost: {S: "1"}'), "transitions.ghost"),
        (('  worker: {alpha0: "0.2"}\n', ""), "testability"),
        (("testability:", "extra: 1\ntestability:"), "model"),
    ],
)
def test_schema_errors_carry_their_location(edit, location) -> None:
    old, new = edit
    assert old in REORDERED

    with pytest.raises(ModelFileError) as excinfo:
        parse_model(REORDERED.replace(old, new, 1))

    assert excinfo.value.location == location
    assert str(excinfo.value).startswith(location)


def test_benign_models_reject_transitions(fixtures_dir) -> None:
    text = (fixtures_dir / "benign_worked.yaml").read_text() + 'transitions:\n  control: {S: "1"}\n'

    with pytest.raises(ModelFileError, match="benign block"):
        parse_model(text)


def test_read_inputs_from_model_file(fixtures_dir) -> None:
    inputs = read_inputs(fixtures_dir / "two_inputs.yaml", ("only",))

    assert inputs.ids == ["light", "heavy"]


def test_read_inputs_requires_inputs_list(fixtures_dir) -> None:
    with pytest.raises(ModelFileError, match="'inputs' list"):
        read_inputs(fixtures_dir / "single_loop.yaml", ("loop",))


@pytest.mark.parametrize("version", ["true", "1.0", "'1'"])
def test_version_must_be_the_integer_one(version) -> None:
    with pytest.raises(ModelFileError) as excinfo:
        parse_model(REORDERED.replace("version: 1", f"version: {version}", 1))

    assert excinfo.value.location == "version"


def test_undecodable_model_file_is_a_format_error(tmp_path) -> None:
    path = tmp_path / "binary.yaml"
    path.write_bytes(b"version: 1\nkind: dependent\nmodules: [\xff\xfe]\n")

    with pytest.raises(ModelFileError, match="byte 37: not valid UTF-8"):
        read_model(path)
    with pytest.raises(ModelFileError, match="not valid UTF-8"):
        read_inputs(path, ("control",))
