"""TT-matrix format for dense layer weights."""

from __future__ import annotations

import math
from typing import Sequence

import attrs
import numpy as np

from tt_automl.compress import CompressionError
from tt_automl.linalg import as_matrix
from tt_automl.tensor_train import tt_svd


@attrs.define
class FactorMismatchError(CompressionError):
    """Row or column factors do not multiply to the matrix dimensions."""

    detail: str

    def __str__(self) -> str:
        return f"TT-matrix factors do not match: {self.detail}"


@attrs.frozen
class TTMatrix:
    """Cores of shape (r_{k-1}, m_k, n_k, r_k) for an M x N matrix with M = prod m_k
    and N = prod n_k; row and column indices are row-major over their factors."""

    cores: list[np.ndarray] = attrs.field(
        converter=lambda cores: [np.asarray(c, dtype=np.float64) for c in cores]
    )

    @cores.validator
    def _check(self, _attribute: attrs.Attribute, cores: list[np.ndarray]) -> None:
        if not cores or any(core.ndim != 4 for core in cores):
            raise FactorMismatchError("cores must be a non-empty list of 4-way arrays")
        if cores[0].shape[0] != 1 or cores[-1].shape[3] != 1:
            raise FactorMismatchError("boundary ranks must be 1")
        for left, right in zip(cores, cores[1:]):
            if left.shape[3] != right.shape[0]:
                raise FactorMismatchError(
                    f"rank {left.shape[3]} does not meet rank {right.shape[0]}"
                )

    @property
    def row_factors(self) -> tuple[int, ...]:
        return tuple(core.shape[1] for core in self.cores)

    @property
    def col_factors(self) -> tuple[int, ...]:
        return tuple(core.shape[2] for core in self.cores)

    @property
    def shape(self) -> tuple[int, int]:
        return math.prod(self.row_factors), math.prod(self.col_factors)

    @property
    def ranks(self) -> tuple[int, ...]:
        return (1, *(core.shape[3] for core in self.cores))

    @property
    def param_count(self) -> int:
        return sum(core.size for core in self.cores)

    def to_matrix(self) -> np.ndarray:
        full = self.cores[0][0]
        for core in self.cores[1:]:
            rows, cols, _ = full.shape
            full = np.einsum("MNr,rmns->MmNns", full, core).reshape(
                rows * core.shape[1], cols * core.shape[2], core.shape[3]
            )
        return full[:, :, 0]

    def transpose(self) -> TTMatrix:
        return TTMatrix([core.transpose(0, 2, 1, 3) for core in self.cores])

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """x @ W for a batch x of shape (B, M), without forming W."""
        batch = x.shape[0]
        state = x.reshape(batch, 1, -1, 1)
        for core in self.cores:
            _, rank, rest, done = state.shape
            _, m, n, new_rank = core.shape
            state = np.einsum(
                "brmqt,rmns->bsqtn", state.reshape(batch, rank, m, rest // m, done), core
            ).reshape(batch, new_rank, rest // m, done * n)
        return state.reshape(batch, -1)


def ttm_decompose(
    w: object,
    row_factors: Sequence[int],
    col_factors: Sequence[int],
    tol: float = 0.0,
    max_rank: int | None = None,
) -> tuple[TTMatrix, float]:
    """TT-matrix of w (M x N) and its relative Frobenius error.

    w is reshaped to (m_1..m_d, n_1..n_d), interleaved to (m_1, n_1, ..., m_d, n_d),
    pairs merged and decomposed with tt_svd.
    """
    matrix = as_matrix(w, "weight")
    rows, cols = matrix.shape
    if len(row_factors) != len(col_factors) or not row_factors:
        raise FactorMismatchError(
            f"{len(row_factors)} row factors vs {len(col_factors)} column factors"
        )
    if math.prod(row_factors) != rows or math.prod(col_factors) != cols:
        raise FactorMismatchError(
            f"{tuple(row_factors)} x {tuple(col_factors)} for a {rows}x{cols} matrix"
        )
    d = len(row_factors)
    interleaved = matrix.reshape(*row_factors, *col_factors).transpose(
        [axis for k in range(d) for axis in (k, d + k)]
    )
    merged = interleaved.reshape([m * n for m, n in zip(row_factors, col_factors)])
    tt = tt_svd(merged, tol, max_rank)
    ttm = TTMatrix(
        [
            core.reshape(core.shape[0], m, n, core.shape[2])
            for core, m, n in zip(tt.cores, row_factors, col_factors)
        ]
    )
    norm = float(np.linalg.norm(matrix))
    error = float(np.linalg.norm(matrix - ttm.to_matrix())) / norm if norm else 0.0
    return ttm, error
