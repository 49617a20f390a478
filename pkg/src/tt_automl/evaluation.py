"""Objective evaluation shared by all optimizers: a linearizable cache, unique-call
budget accounting and concurrent dispatch of query batches."""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

import attrs

from tt_automl import MultiIndex
from tt_automl.logger import Log, get_logger
from tt_automl.trace import EvalFlag, OptimizationTrace

Objective = Callable[[MultiIndex], float]


@attrs.define
class ObjectiveError(Exception):
    """The objective raised while evaluating an index."""

    index: MultiIndex
    cause: str

    def __str__(self) -> str:
        return f"objective failed at index {self.index}: {self.cause}"


class EvaluationCache:
    """Map from multi-index to value; all access is serialized by a lock."""

    def __init__(self) -> None:
        self._values: dict[MultiIndex, float] = {}
        self._lock = threading.Lock()

    def __contains__(self, index: MultiIndex) -> bool:
        with self._lock:
            return index in self._values

    def __len__(self) -> int:
        with self._lock:
            return len(self._values)

    def get(self, index: MultiIndex) -> float | None:
        with self._lock:
            return self._values.get(index)

    def put(self, index: MultiIndex, value: float) -> None:
        with self._lock:
            self._values[index] = value


class BatchEvaluator:
    """Evaluates blocks of indices, each unique index at most once.

    Calls for one block may run concurrently (up to `parallelism`); results are keyed
    by index and written to the trace in block order, so traces do not depend on the
    degree of parallelism.
    """

    def __init__(
        self,
        objective: Objective,
        trace: OptimizationTrace,
        budget: int | None = None,
        parallelism: int = 1,
        logger: Log | None = None,
    ) -> None:
        self.objective = objective
        self.trace = trace
        self.budget = budget
        self.parallelism = max(1, parallelism)
        self.cache = EvaluationCache()
        self.calls = 0
        self.logger = logger or get_logger(__file__)

    def remaining(self) -> int | None:
        if self.budget is None:
            return None
        return max(self.budget - self.calls, 0)

    def exhausted(self) -> bool:
        return self.budget is not None and self.calls >= self.budget

    def unseen(self, block: Iterable[MultiIndex]) -> list[MultiIndex]:
        return [index for index in dict.fromkeys(block) if index not in self.cache]

    def evaluate(self, block: Iterable[MultiIndex]) -> dict[MultiIndex, float]:
        """Values for every index of the block that is known after this call. Unseen
        indices beyond the remaining budget are skipped."""
        block = list(block)
        todo = self.unseen(block)
        if (remaining := self.remaining()) is not None:
            todo = todo[:remaining]
        results = self._dispatch(todo)
        for index in todo:
            value = results[index]
            flag = EvalFlag.OK
            if not math.isfinite(value):
                self.logger.warning(
                    f"objective returned {value} at {index}; recorded as worst value"
                )
                value = self.trace.direction.worst()
                flag = EvalFlag.NON_FINITE
            self.cache.put(index, value)
            self.trace.append(index, value, flag)
        self.calls += len(todo)
        return {
            index: value
            for index in block
            if (value := self.cache.get(index)) is not None
        }

    def _call(self, index: MultiIndex) -> float:
        try:
            return float(self.objective(index))
        except Exception as exception:  # pylint: disable=broad-except
            raise ObjectiveError(index, repr(exception)) from exception

    def _dispatch(self, todo: list[MultiIndex]) -> dict[MultiIndex, float]:
        if self.parallelism == 1 or len(todo) < 2:
            return {index: self._call(index) for index in todo}
        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            futures = {index: pool.submit(self._call, index) for index in todo}
            # first failure in block order, independent of completion order
            return {index: future.result() for index, future in futures.items()}
