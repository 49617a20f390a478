"""Tests for the Tucker-2 kernel factorization."""

import numpy as np
import pytest

from tt_automl.compress.tucker2 import (
    RankRangeError,
    Tucker2Factors,
    auto_rank,
    conv_param_count,
    cp_param_count,
    tucker2_decompose,
    tucker2_param_count,
    tucker2_reconstruct,
)


def _planted_kernel(rng: np.random.Generator, rank: int) -> np.ndarray:
    factors = Tucker2Factors(
        rng.standard_normal((6, rank)),
        rng.standard_normal((rank, rank, 3, 3)),
        rng.standard_normal((8, rank)),
    )
    return tucker2_reconstruct(factors)


def test_exact_rank_is_recovered(rng: np.random.Generator) -> None:
    kernel = _planted_kernel(rng, 3)
    result = tucker2_decompose(kernel, 3)
    assert result.rel_error < 1e-8
    assert np.allclose(tucker2_reconstruct(result.factors), kernel)
    assert result.factors.rank == 3
    assert result.factors.kernel_size == 3


def test_errors_do_not_increase(rng: np.random.Generator) -> None:
    kernel = rng.standard_normal((8, 6, 3, 3))
    result = tucker2_decompose(kernel, 2)
    for before, after in zip(result.errors, result.errors[1:]):
        assert after <= before + 1e-12
    assert 0.0 < result.rel_error < 1.0


def test_factors_are_orthonormal(rng: np.random.Generator) -> None:
    factors = tucker2_decompose(rng.standard_normal((8, 6, 3, 3)), 4).factors
    assert np.allclose(factors.u_in.T @ factors.u_in, np.eye(4))
    assert np.allclose(factors.u_out.T @ factors.u_out, np.eye(4))


def test_full_rank_is_exact(rng: np.random.Generator) -> None:
    kernel = rng.standard_normal((4, 4, 3, 3))
    assert tucker2_decompose(kernel, 4).rel_error < 1e-10


@pytest.mark.parametrize("rank", [0, 7])
def test_rank_outside_range(rng: np.random.Generator, rank: int) -> None:
    with pytest.raises(RankRangeError):
        tucker2_decompose(rng.standard_normal((8, 6, 3, 3)), rank)


def test_rejects_non_square_kernel(rng: np.random.Generator) -> None:
    with pytest.raises(ValueError):
        tucker2_decompose(rng.standard_normal((4, 4, 3, 2)), 2)


def test_zero_kernel() -> None:
    assert tucker2_decompose(np.zeros((4, 4, 3, 3)), 2).rel_error == 0.0


def test_param_counts() -> None:
    assert conv_param_count(16, 16, 3) == 2304
    assert tucker2_param_count(16, 16, 3, 6) == 516
    assert cp_param_count(16, 16, 3, 6) == 228


def test_auto_rank() -> None:
    assert auto_rank(16, 16, 3, 3.0) == 7
    assert auto_rank(16, 16, 3, 1.0) == 14
    assert auto_rank(1, 16, 3, 3.0) == 1
    assert auto_rank(16, 16, 3, 1000.0) == 1
