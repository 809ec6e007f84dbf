"""
Dense kernel for absorbing Markov chains.

Only the control row of the fundamental matrix (I - Q)^-1 is ever needed, so
every query is a single LU solve of (I - Q)^T y = e_0 instead of an inverse.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from modrel.errors import SingularMatrix

logger = logging.getLogger(__name__)

PIVOT_THRESHOLD = 1e-12
NEGATIVE_DUST = 1e-15
ROW_SUM_SLACK = 1e-9
RESIDUAL_FACTOR = 1e-10

FloatArray = npt.NDArray[np.float64]


def _frozen(values: npt.ArrayLike, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TransientMatrix:
    """Sub-stochastic block of a transition matrix restricted to transient states."""

    entries: FloatArray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64, ndmin=2)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"transient matrix must be square, got shape {entries.shape}")
        if np.any(entries < -NEGATIVE_DUST):
            raise ValueError(f"transient matrix has negative entries (min {entries.min():.3g})")
        entries[entries < 0.0] = 0.0

        row_sums = entries.sum(axis=1)
        if np.any(row_sums > 1.0 + ROW_SUM_SLACK):
            row = int(np.argmax(row_sums))
            raise ValueError(f"transient row {row} sums to {row_sums[row]:.12g} > 1")
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class AbsorptionResult:
    from_control: float
    fundamental_row: FloatArray


def fundamental_row(q_hat: TransientMatrix) -> FloatArray:
    """
    Row 0 of (I - Q)^-1: expected visits to each transient state from state 0.

    Raises SingularMatrix when a pivot falls below PIVOT_THRESHOLD, which means
    some transient states form a closed cycle with no way out.
    """
    dim = q_hat.dim
    system = (np.eye(dim) - q_hat.entries).T
    rhs = np.zeros(dim)
    rhs[0] = 1.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(system)

    pivots = np.abs(np.diag(lu))
    smallest = int(np.argmin(pivots))
    if pivots[smallest] < PIVOT_THRESHOLD:
        raise SingularMatrix(
            f"pivot {smallest} has magnitude {pivots[smallest]:.3g}; "
            "transient states contain a cycle with no absorbing exit"
        )

    row = lu_solve((lu, piv), rhs)
    residual = float(np.max(np.abs(system @ row - rhs)))
    if residual > RESIDUAL_FACTOR * dim:
        raise SingularMatrix(f"solve residual {residual:.3g} exceeds {RESIDUAL_FACTOR * dim:.3g}")

    logger.debug(f"Solved control row for {dim} transient states (residual {residual:.3g})")
    return np.clip(row, 0.0, None)


def absorption(q_hat: TransientMatrix, exit_vector: npt.ArrayLike) -> AbsorptionResult:
    exits = np.asarray(exit_vector, dtype=np.float64)
    if exits.shape != (q_hat.dim,):
        raise ValueError(f"exit vector must have length {q_hat.dim}, got shape {exits.shape}")
    if np.any(exits < 0.0) or np.any(exits > 1.0):
        raise ValueError("exit probabilities must lie in [0, 1]")
    if np.any(q_hat.entries.sum(axis=1) + exits > 1.0 + ROW_SUM_SLACK):
        raise ValueError("transient row plus exit probability exceeds 1")

    row = fundamental_row(q_hat)
    probability = float(np.clip(row @ exits, 0.0, 1.0))
    return AbsorptionResult(from_control=probability, fundamental_row=_frozen(row))


def absorption_probability(q_hat: TransientMatrix, exit_vector: npt.ArrayLike) -> float:
    """Probability of leaving state 0 through `exit_vector` rather than any other exit."""
    return absorption(q_hat, exit_vector).from_control


def neumann_partial_sum(q_hat: TransientMatrix, k_max: int) -> FloatArray:
    """Sum of Q^k for k = 0..k_max."""
    if k_max < 0:
        raise ValueError("k_max must be non-negative")

    term = np.eye(q_hat.dim)
    total = term.copy()
    for _ in range(k_max):
        term = term @ q_hat.entries
        total += term
    return total
