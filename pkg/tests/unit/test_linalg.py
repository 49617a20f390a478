"""Tests for the dense tensor helpers."""

import numpy as np
import pytest

from tt_automl.linalg import (
    ModeError,
    NonFiniteError,
    ShapeMismatchError,
    as_dense,
    as_matrix,
    fold,
    numerical_rank,
    qr,
    svd_truncated,
    truncation_rank,
    unfold,
)


def test_as_dense_rejects_non_finite() -> None:
    with pytest.raises(NonFiniteError):
        as_dense([1.0, np.nan])


@pytest.mark.parametrize("value", [3.0, np.zeros((0, 2))])
def test_as_dense_rejects_empty_shapes(value: object) -> None:
    with pytest.raises(ShapeMismatchError):
        as_dense(value)


def test_as_matrix_requires_two_modes() -> None:
    with pytest.raises(ShapeMismatchError):
        as_matrix(np.ones((2, 2, 2)))


def test_unfold_layout() -> None:
    tensor = np.arange(24.0).reshape(2, 3, 4)
    assert unfold(tensor, 1).shape == (3, 8)
    # remaining modes keep ascending order, row-major
    assert unfold(tensor, 1)[0].tolist() == [0, 1, 2, 3, 12, 13, 14, 15]


@pytest.mark.parametrize("mode", [0, 1, 2])
def test_fold_inverts_unfold(mode: int, rng: np.random.Generator) -> None:
    tensor = rng.standard_normal((2, 3, 4))
    assert np.array_equal(fold(unfold(tensor, mode), mode, tensor.shape), tensor)


def test_unfold_rejects_bad_mode() -> None:
    with pytest.raises(ModeError):
        unfold(np.ones((2, 2)), 2)


def test_fold_rejects_bad_shape() -> None:
    with pytest.raises(ShapeMismatchError):
        fold(np.ones((2, 5)), 0, (2, 3))


def test_truncation_rank() -> None:
    s = np.array([10.0, 1.0, 0.1, 0.01])
    assert truncation_rank(s, 0.0) == 4
    assert truncation_rank(s, 0.2) == 2
    assert truncation_rank(s, 100.0) == 1
    assert truncation_rank(s, 0.0, max_rank=2) == 2


def test_svd_truncated_exact_for_low_rank(rng: np.random.Generator) -> None:
    matrix = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 6))
    u, s, v = svd_truncated(matrix, tol=1e-12)
    assert len(s) == 3
    assert np.allclose(u @ np.diag(s) @ v.T, matrix, atol=1e-10)
    assert np.all(np.diff(s) <= 0)


def test_svd_truncated_error_bound(rng: np.random.Generator) -> None:
    matrix = rng.standard_normal((10, 10))
    u, s, v = svd_truncated(matrix, tol=0.3)
    error = np.linalg.norm(matrix - u @ np.diag(s) @ v.T)
    assert error <= 0.3 * np.linalg.norm(matrix) + 1e-12


def test_svd_truncated_validates_arguments() -> None:
    with pytest.raises(ValueError):
        svd_truncated(np.eye(2), tol=-1.0)
    with pytest.raises(ValueError):
        svd_truncated(np.eye(2), max_rank=0)


def test_qr_orthonormal(rng: np.random.Generator) -> None:
    matrix = rng.standard_normal((6, 3))
    q, r = qr(matrix)
    assert np.allclose(q.T @ q, np.eye(3))
    assert np.allclose(q @ r, matrix)


def test_qr_rejects_wide() -> None:
    with pytest.raises(ShapeMismatchError):
        qr(np.ones((2, 3)))


def test_numerical_rank() -> None:
    assert numerical_rank(np.array([3.0, 1.0, 1e-15])) == 2
    assert numerical_rank(np.zeros(3)) == 0
