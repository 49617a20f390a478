"""Tests for the evaluation cache, batch evaluator and traces."""

import math
import threading

import pytest

from tt_automl import MultiIndex
from tt_automl.evaluation import BatchEvaluator, ObjectiveError
from tt_automl.settings import Direction
from tt_automl.trace import EvalFlag, OptimizationTrace


class CountingObjective:
    """Sum of the index, counting calls per index."""

    def __init__(self) -> None:
        self.calls: dict[MultiIndex, int] = {}
        self._lock = threading.Lock()

    def __call__(self, index: MultiIndex) -> float:
        with self._lock:
            self.calls[index] = self.calls.get(index, 0) + 1
        return float(sum(index))


def test_each_index_evaluated_once() -> None:
    objective = CountingObjective()
    trace = OptimizationTrace("test", 0)
    evaluator = BatchEvaluator(objective, trace)
    evaluator.evaluate([(0, 1), (1, 1), (0, 1)])
    values = evaluator.evaluate([(1, 1), (2, 2)])
    assert values == {(1, 1): 2.0, (2, 2): 4.0}
    assert all(count == 1 for count in objective.calls.values())
    assert trace.indices() == [(0, 1), (1, 1), (2, 2)]
    assert [entry.ordinal for entry in trace] == [1, 2, 3]


def test_budget_truncates_block() -> None:
    trace = OptimizationTrace("test", 0)
    evaluator = BatchEvaluator(CountingObjective(), trace, budget=2)
    values = evaluator.evaluate([(0,), (1,), (2,)])
    assert list(values) == [(0,), (1,)]
    assert evaluator.exhausted()
    assert evaluator.remaining() == 0
    assert not evaluator.evaluate([(3,)])


@pytest.mark.parametrize("parallelism", [1, 8])
def test_trace_order_independent_of_parallelism(parallelism: int) -> None:
    block = [(i, j) for i in range(6) for j in range(5)]
    trace = OptimizationTrace("test", 0)
    BatchEvaluator(CountingObjective(), trace, parallelism=parallelism).evaluate(block)
    assert trace.indices() == block


@pytest.mark.parametrize(
    "direction,worst", [(Direction.MAXIMIZE, -math.inf), (Direction.MINIMIZE, math.inf)]
)
def test_non_finite_values_are_flagged(direction: Direction, worst: float) -> None:
    trace = OptimizationTrace("test", 0, direction)
    evaluator = BatchEvaluator(lambda index: math.nan if index[0] else 1.0, trace)
    evaluator.evaluate([(0,), (1,)])
    assert trace.entries[1].flag is EvalFlag.NON_FINITE
    assert trace.entries[1].value == worst
    assert trace.best() == trace.entries[0]


def test_objective_failure_names_index() -> None:
    def failing(index: MultiIndex) -> float:
        raise RuntimeError("boom")

    evaluator = BatchEvaluator(failing, OptimizationTrace("test", 0))
    with pytest.raises(ObjectiveError) as info:
        evaluator.evaluate([(3, 4)])
    assert info.value.index == (3, 4)
    assert "(3, 4)" in str(info.value)


def test_best_so_far_is_monotone() -> None:
    trace = OptimizationTrace("test", 0)
    for value in [3.0, 1.0, 5.0, 5.0, 2.0, 7.0]:
        trace.append((len(trace),), value)
    assert trace.best_so_far() == [3.0, 3.0, 5.0, 5.0, 5.0, 7.0]
    assert trace.best() == trace.entries[5]


def test_best_prefers_earliest_of_equal_values() -> None:
    trace = OptimizationTrace("test", 0)
    for value in [2.0, 5.0, 5.0]:
        trace.append((len(trace),), value)
    assert trace.best() == trace.entries[1]


def test_best_so_far_minimize() -> None:
    trace = OptimizationTrace("test", 0, Direction.MINIMIZE)
    for value in [3.0, 4.0, 1.0, 1.0]:
        trace.append((len(trace),), value)
    assert trace.best_so_far() == [3.0, 3.0, 1.0, 1.0]
    assert trace.best() is not None and trace.best().ordinal == 3


def test_csv_rows() -> None:
    trace = OptimizationTrace("tpe", 4)
    trace.append((0,), 1.5)
    trace.append((1,), 0.5)
    assert list(trace.csv_rows()) == [("tpe", 4, 1, 1.5, 1.5), ("tpe", 4, 2, 0.5, 1.5)]


def test_empty_trace() -> None:
    trace = OptimizationTrace("test", 0)
    assert trace.best() is None
    assert not trace.best_so_far()
