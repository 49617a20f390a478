"""Tests for the TT-matrix format."""

import numpy as np
import pytest

from tt_automl.compress.ttm import FactorMismatchError, TTMatrix, ttm_decompose


def test_exact_decomposition(rng: np.random.Generator) -> None:
    matrix = rng.standard_normal((12, 20))
    ttm, error = ttm_decompose(matrix, (3, 4), (4, 5))
    assert error < 1e-10
    assert ttm.shape == (12, 20)
    assert ttm.row_factors == (3, 4)
    assert ttm.col_factors == (4, 5)
    assert np.allclose(ttm.to_matrix(), matrix)


def test_kronecker_product_has_rank_one(rng: np.random.Generator) -> None:
    matrix = np.kron(rng.standard_normal((3, 4)), rng.standard_normal((4, 5)))
    ttm, error = ttm_decompose(matrix, (3, 4), (4, 5), max_rank=1)
    assert ttm.ranks == (1, 1, 1)
    assert ttm.param_count == 12 + 20
    assert error < 1e-10


def test_truncation_reduces_parameters(rng: np.random.Generator) -> None:
    matrix = rng.standard_normal((16, 16))
    full, _ = ttm_decompose(matrix, (4, 4), (4, 4))
    small, error = ttm_decompose(matrix, (4, 4), (4, 4), max_rank=2)
    assert small.param_count < full.param_count
    assert 0.0 < error < 1.0


def test_matvec_matches_dense(rng: np.random.Generator) -> None:
    ttm, _ = ttm_decompose(rng.standard_normal((24, 6)), (2, 3, 4), (1, 2, 3))
    x = rng.standard_normal((5, 24))
    assert np.allclose(ttm.matvec(x), x @ ttm.to_matrix())


def test_transpose(rng: np.random.Generator) -> None:
    ttm, _ = ttm_decompose(rng.standard_normal((6, 8)), (2, 3), (2, 4))
    assert np.allclose(ttm.transpose().to_matrix(), ttm.to_matrix().T)


@pytest.mark.parametrize(
    "rows,cols",
    [((3, 5), (4, 5)), ((3, 4), (5, 5)), ((12,), (4, 5))],
)
def test_factor_mismatch(rng: np.random.Generator, rows, cols) -> None:  # type: ignore[no-untyped-def]
    with pytest.raises(FactorMismatchError):
        ttm_decompose(rng.standard_normal((12, 20)), rows, cols)


def test_invalid_cores() -> None:
    with pytest.raises(FactorMismatchError):
        TTMatrix([np.ones((2, 2, 2, 1))])
    with pytest.raises(FactorMismatchError):
        TTMatrix([np.ones((1, 2, 2, 2)), np.ones((3, 2, 2, 1))])
    with pytest.raises(FactorMismatchError):
        TTMatrix([])
