"""Tests for tensor-train construction and arithmetic."""

import itertools

import numpy as np
import pytest

from tt_automl.settings import SettingKey, set_setting
from tt_automl.tensor_train import (
    FullTensorCapError,
    RankAgreementError,
    TTIndexError,
    TTShapeMismatchError,
    TTTensor,
    tt_dot,
    tt_eval,
    tt_norm,
    tt_random,
    tt_round,
    tt_svd,
    tt_to_full,
)


def _rel_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_planted_tensors_are_recovered(rng: np.random.Generator) -> None:
    for _ in range(20):
        planted = tt_to_full(tt_random((5,) * 6, 3, rng))
        tt = tt_svd(planted, tol=1e-10)
        assert max(tt.ranks) <= 3
        assert _rel_error(tt_to_full(tt), planted) <= 1e-9


def test_svd_error_bound(rng: np.random.Generator) -> None:
    dense = rng.standard_normal((4, 5, 6, 3))
    for tol in (0.05, 0.2, 0.5):
        assert _rel_error(tt_to_full(tt_svd(dense, tol)), dense) <= tol + 1e-12


@pytest.mark.parametrize("tol", [1e-2, 1e-6, 1e-12])
def test_svd_error_bound_on_random_inputs(
    tol: float, rng: np.random.Generator
) -> None:
    for _ in range(10):
        dense = rng.standard_normal((3, 4, 5, 2))
        assert _rel_error(tt_to_full(tt_svd(dense, tol)), dense) <= tol + 1e-12


def test_rank_one_tensor(rng: np.random.Generator) -> None:
    a, b, c = rng.standard_normal(3), rng.standard_normal(4), rng.standard_normal(5)
    tt = tt_svd(np.einsum("i,j,k->ijk", a, b, c), tol=1e-12)
    assert tt.ranks == (1, 1, 1, 1)


def test_planted_tensor_needs_fewer_parameters(rng: np.random.Generator) -> None:
    planted = tt_random((4,) * 5, 2, rng)
    tt = tt_svd(tt_to_full(planted), tol=1e-10)
    assert tt.param_count <= planted.param_count < 4**5

def test_max_rank_caps_ranks(rng: np.random.Generator) -> None:
    tt = tt_svd(rng.standard_normal((4, 4, 4, 4)), max_rank=2)
    assert max(tt.ranks) <= 2


def test_one_mode_tensor() -> None:
    tt = tt_svd([1.0, 2.0, 3.0])
    assert tt.ranks == (1, 1)
    assert tt_eval(tt, [2]) == 3.0


def test_eval_matches_dense(rng: np.random.Generator) -> None:
    dense = rng.standard_normal((3, 4, 2))
    tt = tt_svd(dense)
    for index in itertools.product(range(3), range(4), range(2)):
        assert tt_eval(tt, index) == pytest.approx(dense[index], abs=1e-10)


def test_eval_rejects_bad_index(rng: np.random.Generator) -> None:
    tt = tt_random((2, 2), 2, rng)
    with pytest.raises(TTIndexError):
        tt_eval(tt, [0, 2])
    with pytest.raises(TTIndexError):
        tt_eval(tt, [0])


def test_param_count_and_ranks(rng: np.random.Generator) -> None:
    tt = tt_random((3, 4, 5), 2, rng)
    assert tt.shape == (3, 4, 5)
    assert tt.ranks == (1, 2, 2, 1)
    assert tt.param_count == 3 * 2 + 2 * 4 * 2 + 2 * 5


def test_invalid_cores() -> None:
    with pytest.raises(RankAgreementError):
        TTTensor([np.ones((1, 2, 2)), np.ones((3, 2, 1))])
    with pytest.raises(RankAgreementError):
        TTTensor([np.ones((2, 2, 1))])
    with pytest.raises(RankAgreementError):
        TTTensor([])


def test_full_cap() -> None:
    tt = TTTensor([np.ones((1, 10, 1))] * 3)
    with pytest.raises(FullTensorCapError):
        tt_to_full(tt, cap=999)


def test_full_cap_follows_setting() -> None:
    set_setting(SettingKey.FULL_CAP, 999)
    tt = TTTensor([np.ones((1, 10, 1))] * 3)
    with pytest.raises(FullTensorCapError):
        tt_to_full(tt)
    assert tt_to_full(tt, cap=1000).shape == (10, 10, 10)


def test_dot_and_norm(rng: np.random.Generator) -> None:
    a = tt_random((3, 3, 3), 2, rng)
    b = tt_random((3, 3, 3), 3, rng)
    assert tt_dot(a, b) == pytest.approx(float(np.sum(tt_to_full(a) * tt_to_full(b))))
    assert tt_norm(a) == pytest.approx(float(np.linalg.norm(tt_to_full(a))))


def test_dot_shape_mismatch(rng: np.random.Generator) -> None:
    with pytest.raises(TTShapeMismatchError):
        tt_dot(tt_random((2, 3), 1, rng), tt_random((3, 2), 1, rng))


def test_round_reduces_redundant_ranks(rng: np.random.Generator) -> None:
    tt = tt_random((4, 4, 4, 4), 2, rng)
    # doubling the cores yields rank 4 representing 2 * tensor
    doubled = TTTensor(
        [np.concatenate([tt.cores[0], tt.cores[0]], axis=2)]
        + [_block_diag(core) for core in tt.cores[1:-1]]
        + [np.concatenate([tt.cores[-1], tt.cores[-1]], axis=0)]
    )
    assert max(doubled.ranks) == 4
    rounded = tt_round(doubled, tol=1e-10)
    assert max(rounded.ranks) <= 2
    assert _rel_error(tt_to_full(rounded), 2 * tt_to_full(tt)) <= 1e-9


def _block_diag(core: np.ndarray) -> np.ndarray:
    left, n, right = core.shape
    result = np.zeros((2 * left, n, 2 * right))
    result[:left, :, :right] = core
    result[left:, :, right:] = core
    return result


def test_round_error_bound(rng: np.random.Generator) -> None:
    tt = tt_svd(rng.standard_normal((4, 4, 4)))
    rounded = tt_round(tt, tol=0.3)
    assert _rel_error(tt_to_full(rounded), tt_to_full(tt)) <= 0.3 + 1e-12
