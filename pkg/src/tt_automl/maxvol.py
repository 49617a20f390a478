"""Quasi-maximum-volume row selection for tall matrices, the index-selection engine of
the cross optimizer."""

from __future__ import annotations

from enum import Enum
from typing import Callable

import attrs
import numpy as np
import scipy.linalg

from tt_automl.constants import MAXVOL_DELTA, MAXVOL_MAX_ITERS, RANK_TOLERANCE
from tt_automl.linalg import as_matrix
from tt_automl.logger import get_logger

_logger = get_logger(__file__)


@attrs.define
class MaxvolError(Exception):
    """Root of maxvol errors."""


@attrs.define
class MaxvolShapeError(MaxvolError):
    """Fewer rows than columns."""

    rows: int
    cols: int

    def __str__(self) -> str:
        return f"maxvol needs rows >= cols >= 1, got {self.rows}x{self.cols}"


@attrs.define
class RankDeficientError(MaxvolError):
    """Input does not have full column rank."""

    smallest: float
    largest: float

    def __str__(self) -> str:
        return (
            f"matrix is rank deficient (singular values {self.smallest:g} vs "
            f"{self.largest:g})"
        )


class Termination(Enum):
    """Why the swap iteration stopped."""

    CONVERGED = "converged"
    MAX_ITERS = "max_iters"


@attrs.frozen
class MaxvolResult:
    """Selected rows and the coefficients C = A A[I]^-1."""

    row_indices: list[int]
    coeffs: np.ndarray
    iterations: int
    termination: Termination

    def dominance(self) -> float:
        return float(np.abs(self.coeffs).max())


def initial_rows(matrix: np.ndarray) -> list[int]:
    """First r pivots of a column-pivoted QR of A^T."""
    _, _, pivots = scipy.linalg.qr(matrix.T, mode="economic", pivoting=True)
    return [int(p) for p in pivots[: matrix.shape[1]]]


def maxvol(
    a: object,
    delta: float = MAXVOL_DELTA,
    max_iters: int = MAXVOL_MAX_ITERS,
    on_swap: Callable[[list[int]], None] | None = None,
) -> MaxvolResult:
    """Selects r rows of the n x r matrix `a` whose square submatrix has quasi-maximal
    |det|: afterwards every |C[i, j]| <= 1 + delta unless max_iters swaps happened.

    `on_swap` is called with the current row set after initialization and after every
    swap.
    """
    matrix = as_matrix(a)
    rows, cols = matrix.shape
    if rows < cols:
        raise MaxvolShapeError(rows, cols)
    singular = np.linalg.svd(matrix, compute_uv=False)
    if singular[-1] <= RANK_TOLERANCE * singular[0]:
        raise RankDeficientError(float(singular[-1]), float(singular[0]))

    indices = initial_rows(matrix)
    coeffs = np.linalg.solve(matrix[indices].T, matrix.T).T
    if on_swap:
        on_swap(list(indices))
    iterations = 0
    termination = Termination.MAX_ITERS
    while True:
        # argmax picks the lowest linear index among ties
        flat = int(np.argmax(np.abs(coeffs)))
        i, j = divmod(flat, cols)
        if abs(coeffs[i, j]) <= 1.0 + delta:
            termination = Termination.CONVERGED
            break
        if iterations >= max_iters:
            break
        indices[j] = i
        pivot_row = coeffs[i].copy()
        pivot_row[j] -= 1.0
        coeffs -= np.outer(coeffs[:, j], pivot_row) / coeffs[i, j]
        iterations += 1
        if on_swap:
            on_swap(list(indices))
    if termination is Termination.MAX_ITERS:
        _logger.warning(f"maxvol stopped after {max_iters} swaps without converging")
    # rank-one updates drift; restore the exact identity rows
    coeffs = np.linalg.solve(matrix[indices].T, matrix.T).T
    return MaxvolResult(indices, coeffs, iterations, termination)
