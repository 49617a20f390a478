"""Dense tensor helpers, mode unfoldings and the truncated SVD / QR every other module
builds on. Dense tensors and matrices are float64 numpy arrays.
"""

from __future__ import annotations

import math
from typing import Sequence

import attrs
import numpy as np

from tt_automl.constants import RANK_TOLERANCE


@attrs.define
class NumericError(Exception):
    """Root of the numeric core errors."""


@attrs.define
class NonFiniteError(NumericError):
    """Input contains NaN or infinite values."""

    what: str = "input"

    def __str__(self) -> str:
        return f"{self.what} contains non-finite values"


@attrs.define
class ModeError(NumericError):
    """Mode index outside the tensor's modes."""

    mode: int
    ndim: int

    def __str__(self) -> str:
        return f"mode {self.mode} out of range for a tensor with {self.ndim} modes"


@attrs.define
class ShapeMismatchError(NumericError):
    """Operand shapes do not agree."""

    detail: str

    def __str__(self) -> str:
        return f"shape mismatch: {self.detail}"


def as_dense(tensor: object, what: str = "tensor") -> np.ndarray:
    """Validates a DenseTensor: float64, at least one mode, positive dims, finite."""
    array = np.asarray(tensor, dtype=np.float64)
    if array.ndim == 0 or any(dim < 1 for dim in array.shape):
        raise ShapeMismatchError(f"{what} needs positive dimensions, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(what)
    return array


def as_matrix(matrix: object, what: str = "matrix") -> np.ndarray:
    array = as_dense(matrix, what)
    if array.ndim != 2:
        raise ShapeMismatchError(f"{what} must be 2-D, got shape {array.shape}")
    return array


def unfold(tensor: np.ndarray, mode: int) -> np.ndarray:
    """Mode-k matricization: shape[mode] rows, the remaining modes in ascending order
    (row-major) along the columns."""
    if not 0 <= mode < tensor.ndim:
        raise ModeError(mode, tensor.ndim)
    return np.moveaxis(tensor, mode, 0).reshape(tensor.shape[mode], -1)


def fold(matrix: np.ndarray, mode: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of `unfold` for a tensor of the given shape."""
    if not 0 <= mode < len(shape):
        raise ModeError(mode, len(shape))
    moved = [shape[mode], *(dim for k, dim in enumerate(shape) if k != mode)]
    if matrix.shape != (moved[0], math.prod(moved[1:])):
        raise ShapeMismatchError(f"cannot fold {matrix.shape} into {tuple(shape)}")
    return np.moveaxis(matrix.reshape(moved), 0, mode)


def truncation_rank(
    singular_values: np.ndarray, threshold: float, max_rank: int | None = None
) -> int:
    """Smallest r with sqrt(sum of squared values beyond r) <= threshold, at least 1,
    capped by max_rank."""
    # tails[r] is the norm of everything from index r on
    squares = singular_values[::-1] ** 2
    tails = np.sqrt(np.cumsum(squares))[::-1]
    tails = np.append(tails, 0.0)
    rank = max(int(np.argmax(tails <= threshold)), 1)
    if max_rank is not None:
        rank = min(rank, max_rank)
    return rank


def svd_abs(
    matrix: np.ndarray, threshold: float, max_rank: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Truncated SVD with an absolute Frobenius threshold on the discarded tail."""
    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    rank = truncation_rank(s, threshold, max_rank)
    return u[:, :rank], s[:rank], vt[:rank].T


def svd_truncated(
    matrix: object, tol: float = 0.0, max_rank: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (U, s, V) with U diag(s) V^T ~ matrix.

    The rank is the minimal r whose discarded tail has Frobenius norm at most
    tol * ||matrix||_F, capped by max_rank (None means unlimited). s is non-increasing
    and U, V have orthonormal columns.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if max_rank is not None and max_rank < 1:
        raise ValueError("max_rank must be positive")
    array = as_matrix(matrix)
    return svd_abs(array, tol * float(np.linalg.norm(array)), max_rank)


def qr(matrix: object) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR of a tall matrix. Rank-deficient input is not an error; the
    deficient diagonal entries of R are then numerically zero."""
    array = as_matrix(matrix)
    rows, cols = array.shape
    if rows < cols:
        raise ShapeMismatchError(f"QR needs rows >= cols, got {rows}x{cols}")
    q, r = np.linalg.qr(array, mode="reduced")
    return q, r


def numerical_rank(diagonal: np.ndarray) -> int:
    """Count of pivots above RANK_TOLERANCE relative to the largest one."""
    magnitudes = np.abs(diagonal)
    if magnitudes.size == 0 or magnitudes.max() == 0.0:
        return 0
    return int(np.count_nonzero(magnitudes > RANK_TOLERANCE * magnitudes.max()))
