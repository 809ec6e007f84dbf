import math

import numpy as np
import pytest

from modrel.errors import EmptyLog, IncompleteEstimates, UnknownModule
from modrel.estimation import (
    FLAG_ALL_FAILURES,
    FLAG_NO_OBSERVATIONS,
    TestLog,
    estimate_parameters,
    estimate_reliability,
)
from modrel.model import InputCase, InputProfile, SystemModel
from modrel.reliability import FaultVector, success_probability
from modrel.simulate import SimConfig, generate_log

TEN_OBSERVATIONS = [
    ("control", "worker", 4),
    ("control", "S", 4),
    ("control", "F", 2),
    ("worker", "S", 5),
]

# every module is visited in roughly a third of the runs or more
FOUR_MODULE = SystemModel(
    ("m0", "m1", "m2", "m3"),
    [
        [0.0, 0.4, 0.3, 0.0],
        [0.0, 0.0, 0.3, 0.4],
        [0.0, 0.0, 0.0, 0.5],
        [0.0, 0.2, 0.0, 0.0],
    ],
    [0.3, 0.3, 0.5, 0.8],
)
FOUR_MODULE_FAULTS = FaultVector.from_revealed([0.05, 0.1, 0.15, 0.2])


def test_ten_observation_example() -> None:
    report = estimate_parameters(TestLog.from_records(("control", "worker"), TEN_OBSERVATIONS))

    assert report.alpha_hat == pytest.approx([0.2, 0.0])
    assert report.p_hat[0] == pytest.approx([0.0, 0.5])
    assert report.p_hat_s == pytest.approx([0.5, 1.0])
    assert report.support.tolist() == [10, 5]
    assert report.flags == {}


def test_estimates_plug_into_reliability() -> None:
    log = TestLog.from_records(("loop",), [("loop", "loop", 4), ("loop", "S", 4), ("loop", "F", 2)])

    result = estimate_reliability(estimate_parameters(log), InputProfile.single(1))

    assert result.system == pytest.approx(2 / 3, abs=1e-12)
    assert result.per_input == {"default": pytest.approx(2 / 3, abs=1e-12)}


def test_estimated_reliability_is_shared_by_all_inputs() -> None:
    log = TestLog.from_records(("control", "worker"), TEN_OBSERVATIONS)
    inputs = InputProfile((InputCase("a", 1.0), InputCase("b", 3.0)))

    result = estimate_reliability(estimate_parameters(log), inputs)

    assert result.per_input["a"] == result.per_input["b"] == pytest.approx(0.8)
    assert result.system == pytest.approx(0.8)


def test_unobserved_module_is_flagged_and_left_undefined(caplog) -> None:
    log = TestLog.from_records(("control", "idle"), [("control", "S", 3)])

    report = estimate_parameters(log)

    assert report.flags == {1: (FLAG_NO_OBSERVATIONS,)}
    assert math.isnan(report.alpha_hat[1])
    assert np.isnan(report.p_hat[1]).all()
    assert report.missing() == [1]
    assert "'idle' has no observations" in caplog.text


def test_always_failing_module_has_undefined_transfer_row() -> None:
    log = TestLog.from_records(("control", "broken"), [("control", "broken", 2), ("control", "S", 2), ("broken", "F", 2)])

    report = estimate_parameters(log)

    assert report.alpha_hat[1] == 1.0
    assert report.flags == {1: (FLAG_ALL_FAILURES,)}
    assert math.isnan(report.p_hat_s[1])
    assert report.to_dict()["modules"]["broken"]["p_hat_S"] is None

    model, faults = report.to_system_model()
    assert model.success_exit[1] == 1.0
    assert success_probability(model, faults) == pytest.approx(0.5)


def test_unreachable_unobserved_module_does_not_block_plug_in() -> None:
    log = TestLog.from_records(("control", "idle"), [("control", "S", 3)])

    model, faults = estimate_parameters(log).to_system_model()

    assert success_probability(model, faults) == pytest.approx(1.0, abs=1e-12)


def test_reachable_unobserved_module_blocks_plug_in() -> None:
    log = TestLog.from_records(("control", "worker"), [("control", "worker", 3), ("control", "S", 2)])
    report = estimate_parameters(log)

    assert report.reachable_from_control() == [0, 1]
    with pytest.raises(IncompleteEstimates, match="worker"):
        report.to_system_model()


def test_empty_log_is_rejected() -> None:
    with pytest.raises(EmptyLog):
        estimate_parameters(TestLog.from_records(("control",), []))


def test_records_with_unknown_modules_are_rejected() -> None:
    with pytest.raises(UnknownModule, match="'ghost'"):
        TestLog.from_records(("control",), [("control", "ghost", 1)])
    with pytest.raises(UnknownModule, match="'ghost'"):
        TestLog.from_records(("control",), [("ghost", "S", 1)])


def test_record_order_does_not_change_estimates() -> None:
    rng = np.random.default_rng(12)
    names = ("control", "worker")
    reference = estimate_parameters(TestLog.from_records(names, TEN_OBSERVATIONS))

    for _ in range(5):
        shuffled = [TEN_OBSERVATIONS[i] for i in rng.permutation(len(TEN_OBSERVATIONS))]
        report = estimate_parameters(TestLog.from_records(names, shuffled))

        np.testing.assert_array_equal(report.alpha_hat, reference.alpha_hat)
        np.testing.assert_array_equal(report.p_hat, reference.p_hat)


def test_split_records_accumulate() -> None:
    split = [("control", "S", 1), ("control", "S", 3), *TEN_OBSERVATIONS[:1], *TEN_OBSERVATIONS[2:]]
    log = TestLog.from_records(("control", "worker"), split)

    assert log.to_success.tolist() == [4, 5]
    assert log.total == 15


def test_records_and_merge() -> None:
    names = ("control", "worker")
    log = TestLog.from_records(names, TEN_OBSERVATIONS)

    assert sorted(log.records()) == sorted(TEN_OBSERVATIONS)

    doubled = log.merge(log)
    assert doubled.total == 2 * log.total
    np.testing.assert_array_equal(estimate_parameters(doubled).alpha_hat, estimate_parameters(log).alpha_hat)

    with pytest.raises(ValueError, match="different modules"):
        log.merge(TestLog.from_records(("other", "worker"), []))


def test_estimates_recover_generating_model() -> None:
    log = generate_log(FOUR_MODULE, FOUR_MODULE_FAULTS, SimConfig(runs=100_000, seed=3))

    report = estimate_parameters(log)

    assert np.max(np.abs(report.p_hat - FOUR_MODULE.transfer)) <= 0.01
    assert np.max(np.abs(report.p_hat_s - FOUR_MODULE.success_exit)) <= 0.01
    assert np.max(np.abs(report.alpha_hat - FOUR_MODULE_FAULTS.revealed)) <= 0.01

    expected = success_probability(FOUR_MODULE, FOUR_MODULE_FAULTS)
    estimated = estimate_reliability(report, InputProfile.single(4)).system
    assert abs(estimated - expected) <= 0.02


def test_estimation_error_shrinks_like_inverse_square_root() -> None:
    model = SystemModel(("loop",), [[0.5]], [0.5])
    faults = FaultVector.from_revealed([0.2])
    expected = success_probability(model, faults)
    seeds = range(16)

    def rms_error(runs: int) -> float:
        errors = []
        for seed in seeds:
            report = estimate_parameters(generate_log(model, faults, SimConfig(runs=runs, seed=seed)))
            errors.append(estimate_reliability(report, InputProfile.single(1)).system - expected)
        return float(np.sqrt(np.mean(np.square(errors))))

    ratio = rms_error(200) / rms_error(20_000)

    assert 5.0 <= ratio <= 20.0
