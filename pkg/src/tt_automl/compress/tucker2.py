"""Channel-bottleneck (Tucker-2) factorization of 4-D convolution kernels.

A kernel K of shape (C_out, C_in, D, D) becomes u_in (C_in x R), a core (R, R, D, D) and
u_out (C_out x R); as layers this is a 1x1 conv, a DxD conv between R channels and a
1x1 conv, costing C_in*R + D^2*R^2 + R*C_out instead of C_in*C_out*D^2 weights.
"""

from __future__ import annotations

import attrs
import numpy as np

from tt_automl.compress import CompressionError
from tt_automl.linalg import as_dense, unfold
from tt_automl.logger import get_logger

_logger = get_logger(__file__)


@attrs.define
class RankRangeError(CompressionError):
    """Bottleneck rank outside [1, min(C_in, C_out)]."""

    rank: int
    limit: int

    def __str__(self) -> str:
        return f"rank {self.rank} outside [1, {self.limit}]"


@attrs.frozen
class Tucker2Factors:
    u_in: np.ndarray
    core: np.ndarray
    u_out: np.ndarray

    @property
    def rank(self) -> int:
        return self.core.shape[0]

    @property
    def kernel_size(self) -> int:
        return self.core.shape[2]

    @property
    def param_count(self) -> int:
        return self.u_in.size + self.core.size + self.u_out.size


@attrs.frozen
class Tucker2Result:
    factors: Tucker2Factors
    rel_error: float
    # relative error after initialization and after every ALS sweep
    errors: list[float]


def tucker2_param_count(c_in: int, c_out: int, kernel: int, rank: int) -> int:
    return c_in * rank + kernel * kernel * rank * rank + rank * c_out


def conv_param_count(c_in: int, c_out: int, kernel: int) -> int:
    return c_in * c_out * kernel * kernel


def cp_param_count(c_in: int, c_out: int, kernel: int, rank: int) -> int:
    """Weights of a rank-R canonical (CP) decomposition of the same kernel."""
    return rank * (c_in + c_out + 2 * kernel)


def auto_rank(c_in: int, c_out: int, kernel: int, target_ratio: float) -> int:
    """Largest R whose factor weights fit in conv weights / target_ratio, at least 1."""
    budget = conv_param_count(c_in, c_out, kernel) / target_ratio
    best = 1
    for rank in range(1, min(c_in, c_out) + 1):
        if tucker2_param_count(c_in, c_out, kernel, rank) <= budget:
            best = rank
    return best


def _leading(matrix: np.ndarray, rank: int) -> np.ndarray:
    u, _, _ = np.linalg.svd(matrix, full_matrices=False)
    return u[:, :rank]


def _project(kernel: np.ndarray, u_in: np.ndarray, u_out: np.ndarray) -> np.ndarray:
    return np.einsum("oihw,oa,ib->abhw", kernel, u_out, u_in)


def tucker2_reconstruct(factors: Tucker2Factors) -> np.ndarray:
    """K[o, i, h, w] = sum_ab u_out[o, a] core[a, b, h, w] u_in[i, b]."""
    return np.einsum("oa,abhw,ib->oihw", factors.u_out, factors.core, factors.u_in)


def _rel_error(kernel: np.ndarray, factors: Tucker2Factors, norm: float) -> float:
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(kernel - tucker2_reconstruct(factors))) / norm


def tucker2_decompose(
    kernel: object, rank: int, max_iters: int = 50, tol: float = 1e-8
) -> Tucker2Result:
    """HOOI: SVD initialization of both channel factors, then alternating updates of
    u_in, u_out and the core. The error never increases; iteration stops after
    max_iters sweeps or when the improvement drops below tol."""
    weights = as_dense(kernel, "kernel")
    if weights.ndim != 4 or weights.shape[2] != weights.shape[3]:
        raise ValueError(f"expected a (C_out, C_in, D, D) kernel, got {weights.shape}")
    c_out, c_in = weights.shape[:2]
    limit = min(c_in, c_out)
    if not 1 <= rank <= limit:
        raise RankRangeError(rank, limit)
    norm = float(np.linalg.norm(weights))
    u_out = _leading(unfold(weights, 0), rank)
    u_in = _leading(unfold(weights, 1), rank)
    factors = Tucker2Factors(u_in, _project(weights, u_in, u_out), u_out)
    errors = [_rel_error(weights, factors, norm)]
    for _ in range(max_iters):
        u_in = _leading(unfold(np.einsum("oihw,oa->aihw", weights, u_out), 1), rank)
        u_out = _leading(unfold(np.einsum("oihw,ib->obhw", weights, u_in), 0), rank)
        factors = Tucker2Factors(u_in, _project(weights, u_in, u_out), u_out)
        errors.append(_rel_error(weights, factors, norm))
        if errors[-2] - errors[-1] < tol:
            break
    _logger.debug(
        f"tucker2 rank {rank} on {weights.shape}: error {errors[-1]:.3e} after "
        f"{len(errors) - 1} sweeps"
    )
    return Tucker2Result(factors, errors[-1], errors)
