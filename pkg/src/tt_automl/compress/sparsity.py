"""Magnitude pruning."""

from __future__ import annotations

import math

import attrs
import numpy as np

from tt_automl.compress import CompressionError


@attrs.define
class SparsityError(CompressionError):
    sparsity: float

    def __str__(self) -> str:
        return f"sparsity {self.sparsity} outside [0, 1)"


@attrs.frozen
class PruneResult:
    tensor: np.ndarray
    # True where the entry survived
    mask: np.ndarray
    achieved_sparsity: float


def prune_magnitude(tensor: np.ndarray, sparsity: float) -> PruneResult:
    """Zeroes the floor(sparsity * size) entries of smallest magnitude, ties going to
    the lowest linear index."""
    if not 0.0 <= sparsity < 1.0:
        raise SparsityError(sparsity)
    values = np.asarray(tensor, dtype=np.float64)
    count = math.floor(sparsity * values.size)
    order = np.argsort(np.abs(values).ravel(), kind="stable")
    mask = np.ones(values.size, dtype=bool)
    mask[order[:count]] = False
    mask = mask.reshape(values.shape)
    return PruneResult(
        np.where(mask, values, 0.0), mask, count / values.size if values.size else 0.0
    )
