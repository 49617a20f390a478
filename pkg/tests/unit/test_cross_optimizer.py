"""Tests for the TT-cross optimizer."""

import math

import pytest

from tt_automl import MultiIndex
from tt_automl.cross_optimizer import (
    BudgetTooSmallError,
    CrossOptimizer,
    IndexSets,
    InvalidDimensionsError,
    OptConfig,
    optimize,
    query_block,
    random_suffixes,
)
from tt_automl.harness.tabular import generate_planted_table, tabular_objective
from tt_automl.rng import Rng
from tt_automl.settings import Direction, Transform, set_rank
from tt_automl.trace import EvalFlag

A = [1.0, 5.0, 2.0, 0.0, 3.0]
B = [0.0, 2.0, 7.0, 1.0, 4.0]
# multiples of 10 keep every b + c sum distinct
C = [30.0, 0.0, 10.0, 60.0, 20.0]


def separable(index: MultiIndex) -> float:
    i, j, k = index
    return A[i] + B[j] + C[k]


class Recorder:
    def __init__(self, objective) -> None:  # type: ignore[no-untyped-def]
        self.objective = objective
        self.calls: list[MultiIndex] = []

    def __call__(self, index: MultiIndex) -> float:
        self.calls.append(index)
        return self.objective(index)


def test_one_dimension_scans_everything() -> None:
    values = [3.0, 9.0, 1.0, 4.0, 8.0, 2.0, 0.5]
    trace = optimize(lambda index: values[index[0]], [7], OptConfig(rank=3, budget=63))
    assert sorted(trace.indices()) == [(i,) for i in range(7)]
    assert trace.best() is not None and trace.best().index == (1,)


def test_separable_global_maximum() -> None:
    trace = optimize(separable, [5, 5, 5], OptConfig(rank=2, sweeps=2, budget=125))
    best = trace.best()
    assert best is not None
    assert best.value == max(A) + max(B) + max(C)
    assert best.index == (1, 2, 3)


def test_minimization() -> None:
    cfg = OptConfig(rank=2, sweeps=2, budget=125, direction=Direction.MINIMIZE)
    best = optimize(separable, [5, 5, 5], cfg).best()
    assert best is not None
    assert best.value == min(A) + min(B) + min(C)


def test_exp_shift_transform_finds_maximum() -> None:
    cfg = OptConfig(rank=2, sweeps=2, budget=125, transform=Transform.EXP_SHIFT)
    best = optimize(separable, [5, 5, 5], cfg).best()
    assert best is not None
    assert best.value == max(A) + max(B) + max(C)


@pytest.mark.parametrize("budget", [50, 70, 100])
def test_budget_is_respected(budget: int) -> None:
    recorder = Recorder(separable)
    trace = optimize(recorder, [5, 5, 5], OptConfig(rank=2, sweeps=10, budget=budget))
    assert len(trace) <= budget
    assert len(recorder.calls) == len(trace)


def test_no_index_is_evaluated_twice() -> None:
    recorder = Recorder(separable)
    optimize(recorder, [5, 5, 5], OptConfig(rank=3, sweeps=4, budget=125))
    assert len(recorder.calls) == len(set(recorder.calls))


def test_best_so_far_monotone() -> None:
    trace = optimize(separable, [5, 5, 5], OptConfig(rank=2, sweeps=3, budget=125))
    series = trace.best_so_far()
    assert all(b >= a for a, b in zip(series, series[1:]))


def test_deterministic() -> None:
    cfg = OptConfig(rank=3, sweeps=3, budget=300, seed=9)
    table = tabular_objective(generate_planted_table((4, 5, 4, 3), seed=2).benchmark)
    first = optimize(table, [4, 5, 4, 3], cfg)
    second = optimize(table, [4, 5, 4, 3], cfg)
    assert first.entries == second.entries


def test_parallel_dispatch_keeps_trace() -> None:
    cfg = OptConfig(rank=3, sweeps=3, budget=300, seed=4)
    table = tabular_objective(generate_planted_table((4, 5, 4, 3), seed=1).benchmark)
    serial = optimize(table, [4, 5, 4, 3], cfg, parallelism=1)
    parallel = optimize(table, [4, 5, 4, 3], cfg, parallelism=8)
    assert serial.entries == parallel.entries


def test_small_planted_tables() -> None:
    found = 0
    for seed in range(20):
        planted = generate_planted_table((4, 4, 4), seed=seed)
        cfg = OptConfig(rank=3, sweeps=4, budget=64, seed=seed)
        best = optimize(tabular_objective(planted.benchmark), [4, 4, 4], cfg).best()
        found += best is not None and best.index == planted.planted
    assert found >= 16


def test_non_finite_values_are_worst() -> None:
    def objective(index: MultiIndex) -> float:
        return math.nan if index == (0, 0) else float(index[0] + index[1])

    trace = optimize(objective, [4, 4], OptConfig(rank=2, budget=16))
    flagged = [entry for entry in trace if entry.flag is EvalFlag.NON_FINITE]
    assert all(entry.value == -math.inf for entry in flagged)
    assert trace.best() is not None and trace.best().index == (3, 3)


def test_budget_too_small_fails_before_evaluating() -> None:
    recorder = Recorder(separable)
    with pytest.raises(BudgetTooSmallError) as info:
        optimize(recorder, [5, 5, 5], OptConfig(rank=4, budget=79))
    assert info.value.required == 80
    assert not recorder.calls


@pytest.mark.parametrize("dims", [[], [3, 0]])
def test_invalid_dimensions(dims: list[int]) -> None:
    with pytest.raises(InvalidDimensionsError):
        optimize(separable, dims, OptConfig(rank=1, budget=10))


def test_config_validation() -> None:
    with pytest.raises(ValueError):
        OptConfig(rank=0)
    with pytest.raises(ValueError):
        OptConfig(sweeps=0)


def test_config_from_settings() -> None:
    set_rank(6)
    cfg = OptConfig.from_settings(500, seed=3, sweeps=2)
    assert (cfg.rank, cfg.sweeps, cfg.budget, cfg.seed) == (6, 2, 500, 3)
    assert cfg.snapshot()["direction"] == "maximize"


def test_query_block_order() -> None:
    sets = IndexSets([[()], [(0,), (2,)], [()]], [[(1, 1)], [(0,), (3,), (4,)], [()]])
    block = query_block(sets, 1, 5)
    assert len(block) == 30
    assert block[:4] == [(0, 0, 0), (0, 0, 3), (0, 0, 4), (0, 1, 0)]
    assert set(block) == {
        (l, i, s) for l in (0, 2) for i in range(5) for s in (0, 3, 4)
    }
    assert query_block(sets, 1, 5) == block


def test_query_block_skips_seen() -> None:
    sets = IndexSets([[()], [()]], [[(0,), (1,)], [()]])
    block = query_block(sets, 0, 3, seen={(0, 0), (2, 1)})
    assert block == [(0, 1), (1, 0), (1, 1), (2, 0)]


def test_first_block_size() -> None:
    sets = IndexSets.initial([5, 5, 5], 4, Rng(0))
    assert len(query_block(sets, 0, 5)) <= 5 * 4
    assert len(sets.right[0]) == 4
    assert sets.right[2] == [()]


def test_random_suffixes_distinct() -> None:
    rng = Rng(3)
    small = random_suffixes([2, 2], 3, rng)
    assert len(set(small)) == 3
    assert len(random_suffixes([2, 2], 10, rng)) == 4
    large = random_suffixes([10, 10, 10], 7, rng)
    assert len(set(large)) == 7
    assert all(0 <= i < 10 for index in large for i in index)


def test_index_sets_stay_valid() -> None:
    optimizer = CrossOptimizer(separable, [5, 5, 5], OptConfig(rank=3, budget=125))
    optimizer.run()
    for k, prefixes in enumerate(optimizer.sets.left):
        assert len(prefixes) == len(set(prefixes))
        assert len(prefixes) <= 3
        assert all(len(prefix) == k for prefix in prefixes)
    for k, suffixes in enumerate(optimizer.sets.right):
        assert len(suffixes) == len(set(suffixes))
        assert all(len(suffix) == 2 - k for suffix in suffixes)
