import numpy as np
import pytest

from modrel.chain import TransientMatrix, absorption, absorption_probability, fundamental_row, neumann_partial_sum
from modrel.errors import SingularMatrix


@pytest.mark.parametrize(
    "entries, expected",
    [
        ([[0.0]], [1.0]),
        ([[0.4]], [1.0 / 0.6]),
        ([[0.2, 0.3], [1.0, 0.0]], [2.0, 0.6]),
    ],
)
def test_fundamental_row_matches_hand_inverse(entries, expected) -> None:
    row = fundamental_row(TransientMatrix(entries))

    assert row == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "entries, exits, expected",
    [
        ([[0.0]], [1.0], 1.0),
        ([[0.4]], [0.4], 2.0 / 3.0),
        ([[0.0, 0.45], [0.0, 0.0]], [0.45, 0.8], 0.81),
    ],
)
def test_absorption_probability_examples(entries, exits, expected) -> None:
    assert absorption_probability(TransientMatrix(entries), exits) == pytest.approx(expected, abs=1e-12)


def test_absorption_returns_control_row_with_probability() -> None:
    result = absorption(TransientMatrix([[0.2, 0.3], [1.0, 0.0]]), [0.4, 0.0])

    assert result.from_control == pytest.approx(0.8, abs=1e-12)
    assert result.fundamental_row == pytest.approx([2.0, 0.6], abs=1e-12)


@pytest.mark.parametrize("entries", [[[1.0]], [[0.0, 1.0], [1.0, 0.0]], [[0.5, 0.0], [0.0, 1.0]]])
def test_fundamental_row_rejects_cycles_without_exit(entries) -> None:
    with pytest.raises(SingularMatrix, match="pivot"):
        fundamental_row(TransientMatrix(entries))


def test_transient_matrix_clamps_floating_point_dust() -> None:
    q_hat = TransientMatrix([[-1e-16, 0.5], [0.0, 0.0]])

    assert q_hat.entries[0, 0] == 0.0
    assert q_hat.dim == 2


def test_transient_matrix_rejects_negative_entries_and_overfull_rows() -> None:
    with pytest.raises(ValueError, match="negative"):
        TransientMatrix([[-1e-3]])
    with pytest.raises(ValueError, match="row 0 sums"):
        TransientMatrix([[0.7, 0.4], [0.0, 0.0]])
    with pytest.raises(ValueError, match="square"):
        TransientMatrix([[0.1, 0.2]])


def test_transient_matrix_is_read_only() -> None:
    q_hat = TransientMatrix([[0.5]])

    with pytest.raises(ValueError):
        q_hat.entries[0, 0] = 0.1


def test_absorption_rejects_exit_that_overfills_a_row() -> None:
    with pytest.raises(ValueError, match="exceeds 1"):
        absorption_probability(TransientMatrix([[0.5]]), [0.6])


@pytest.mark.parametrize("k_max, expected", [(0, 1.0), (2, 1.75)])
def test_neumann_partial_sum_small_cases(k_max, expected) -> None:
    assert neumann_partial_sum(TransientMatrix([[0.5]]), k_max)[0, 0] == pytest.approx(expected, abs=1e-15)


def test_neumann_partial_sum_rejects_negative_order() -> None:
    with pytest.raises(ValueError):
        neumann_partial_sum(TransientMatrix([[0.5]]), -1)


def _random_transient(rng: np.random.Generator, dim: int, max_row_sum: float = 0.9) -> TransientMatrix:
    raw = rng.random((dim, dim))
    raw *= (rng.uniform(0.0, max_row_sum, size=dim) / raw.sum(axis=1))[:, None]
    return TransientMatrix(raw)


def test_fundamental_row_agrees_with_neumann_series_on_random_matrices() -> None:
    rng = np.random.default_rng(5)
    for _ in range(100):
        q_hat = _random_transient(rng, int(rng.integers(1, 13)))

        # 0.9 ** 300 < 1e-13, so the last increment is far below 1e-12
        series = neumann_partial_sum(q_hat, 300)
        assert fundamental_row(q_hat) == pytest.approx(series[0], abs=1e-8)


def test_fundamental_row_solves_the_transposed_system() -> None:
    rng = np.random.default_rng(11)
    for _ in range(50):
        q_hat = _random_transient(rng, int(rng.integers(1, 13)), max_row_sum=1.0)
        row = fundamental_row(q_hat)

        residual = row @ (np.eye(q_hat.dim) - q_hat.entries) - np.eye(q_hat.dim)[0]
        assert np.max(np.abs(residual)) <= 1e-10
        assert np.all(row >= 0.0)
