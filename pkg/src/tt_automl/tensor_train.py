"""Tensor-train representation: construction from dense tensors (TT-SVD), evaluation,
rounding, dot products and norms."""

from __future__ import annotations

import math
from typing import Sequence

import attrs
import numpy as np

from tt_automl.linalg import as_dense, svd_abs
from tt_automl.logger import get_logger
from tt_automl.settings import get_full_cap

_logger = get_logger(__file__)


@attrs.define
class TensorTrainError(Exception):
    """Root of tensor-train errors."""


@attrs.define
class RankAgreementError(TensorTrainError):
    """Adjacent cores disagree on their shared rank, or a boundary rank is not 1."""

    detail: str

    def __str__(self) -> str:
        return f"invalid TT cores: {self.detail}"


@attrs.define
class TTIndexError(TensorTrainError):
    """Multi-index outside the mode sizes."""

    index: tuple
    shape: tuple

    def __str__(self) -> str:
        return f"index {self.index} out of range for shape {self.shape}"


@attrs.define
class FullTensorCapError(TensorTrainError):
    """Densifying would exceed the configured entry cap."""

    entries: int
    cap: int

    def __str__(self) -> str:
        return f"dense tensor would have {self.entries} entries (cap {self.cap})"


@attrs.define
class TTShapeMismatchError(TensorTrainError):
    """Operands have different mode sizes."""

    left: tuple
    right: tuple

    def __str__(self) -> str:
        return f"mode sizes differ: {self.left} vs {self.right}"


def _validate_cores(
    _instance: TTTensor, _attribute: attrs.Attribute, cores: list[np.ndarray]
) -> None:
    if not cores:
        raise RankAgreementError("no cores")
    for k, core in enumerate(cores):
        if core.ndim != 3:
            raise RankAgreementError(f"core {k} has {core.ndim} modes, expected 3")
    if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
        raise RankAgreementError("boundary ranks must be 1")
    for k in range(len(cores) - 1):
        if cores[k].shape[2] != cores[k + 1].shape[0]:
            raise RankAgreementError(
                f"core {k} right rank {cores[k].shape[2]} != core {k + 1} left rank "
                f"{cores[k + 1].shape[0]}"
            )


@attrs.frozen
class TTTensor:
    """A d-way tensor as a chain of cores of shape (r_{k-1}, n_k, r_k)."""

    cores: list[np.ndarray] = attrs.field(
        converter=lambda cores: [np.asarray(c, dtype=np.float64) for c in cores],
        validator=_validate_cores,
    )

    @property
    def ndim(self) -> int:
        return len(self.cores)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(core.shape[1] for core in self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        """All d+1 ranks including the boundary ones."""
        return (1, *(core.shape[2] for core in self.cores))

    @property
    def param_count(self) -> int:
        return sum(core.size for core in self.cores)


def tt_svd(tensor: object, tol: float = 0.0, max_rank: int | None = None) -> TTTensor:
    """Sequential SVD construction with a tol/sqrt(d-1) truncation budget per step, so
    ||t - full(result)||_F <= tol ||t||_F whenever max_rank does not bind."""
    dense = as_dense(tensor)
    shape = dense.shape
    d = len(shape)
    if d == 1:
        return TTTensor([dense.reshape(1, shape[0], 1)])
    threshold = tol / math.sqrt(d - 1) * float(np.linalg.norm(dense))
    cores = []
    rank = 1
    remainder = dense
    for k in range(d - 1):
        remainder = remainder.reshape(rank * shape[k], -1)
        u, s, v = svd_abs(remainder, threshold, max_rank)
        new_rank = len(s)
        cores.append(u.reshape(rank, shape[k], new_rank))
        remainder = s[:, None] * v.T
        rank = new_rank
    cores.append(remainder.reshape(rank, shape[-1], 1))
    return TTTensor(cores)


def tt_eval(tt: TTTensor, idx: Sequence[int]) -> float:
    index = tuple(int(i) for i in idx)
    if len(index) != tt.ndim or any(
        not 0 <= i < n for i, n in zip(index, tt.shape)
    ):
        raise TTIndexError(index, tt.shape)
    row = np.ones((1,))
    for core, i in zip(tt.cores, index):
        row = row @ core[:, i, :]
    return float(row[0])


def tt_to_full(tt: TTTensor, cap: int | None = None) -> np.ndarray:
    """Dense tensor; refuses shapes above `cap` entries (default: the full_cap
    setting)."""
    cap = get_full_cap() if cap is None else cap
    entries = math.prod(tt.shape)
    if entries > cap:
        raise FullTensorCapError(entries, cap)
    full = tt.cores[0].reshape(tt.shape[0], -1)
    for core in tt.cores[1:]:
        rank = core.shape[0]
        full = full.reshape(-1, rank) @ core.reshape(rank, -1)
    return full.reshape(tt.shape)


def tt_dot(a: TTTensor, b: TTTensor) -> float:
    """Inner product of the two dense tensors, computed core by core."""
    if a.shape != b.shape:
        raise TTShapeMismatchError(a.shape, b.shape)
    carry = np.ones((1, 1))
    for core_a, core_b in zip(a.cores, b.cores):
        carry = np.einsum("ab,aic,bid->cd", carry, core_a, core_b)
    return float(carry[0, 0])


def tt_norm(tt: TTTensor) -> float:
    return math.sqrt(max(tt_dot(tt, tt), 0.0))


def _orthogonalize_right(cores: list[np.ndarray]) -> list[np.ndarray]:
    """Right-to-left QR sweep leaving cores 1..d-1 right-orthonormal."""
    cores = [core.copy() for core in cores]
    for k in range(len(cores) - 1, 0, -1):
        left, n, right = cores[k].shape
        q, r = np.linalg.qr(cores[k].reshape(left, n * right).T)
        new_rank = q.shape[1]
        cores[k] = q.T.reshape(new_rank, n, right)
        prev = cores[k - 1]
        cores[k - 1] = np.tensordot(prev, r.T, axes=(2, 0))
    return cores


def tt_round(tt: TTTensor, tol: float = 0.0, max_rank: int | None = None) -> TTTensor:
    """Recompresses to the smallest ranks meeting relative error tol."""
    if tt.ndim == 1:
        return TTTensor(tt.cores)
    cores = _orthogonalize_right(tt.cores)
    norm = float(np.linalg.norm(cores[0]))
    threshold = tol / math.sqrt(tt.ndim - 1) * norm
    for k in range(tt.ndim - 1):
        left, n, _ = cores[k].shape
        u, s, v = svd_abs(cores[k].reshape(left * n, -1), threshold, max_rank)
        new_rank = len(s)
        cores[k] = u.reshape(left, n, new_rank)
        cores[k + 1] = np.tensordot(s[:, None] * v.T, cores[k + 1], axes=(1, 0))
    rounded = TTTensor(cores)
    _logger.debug(f"rounded TT ranks {tt.ranks} -> {rounded.ranks}")
    return rounded


def tt_random(
    shape: Sequence[int], rank: int, generator: np.random.Generator
) -> TTTensor:
    """Random normal cores with every inner rank equal to `rank`."""
    ranks = [1, *([rank] * (len(shape) - 1)), 1]
    return TTTensor(
        [
            generator.standard_normal((ranks[k], n, ranks[k + 1]))
            for k, n in enumerate(shape)
        ]
    )

