"""Ordered record of objective evaluations and the derived best-so-far series."""

from __future__ import annotations

from enum import Enum
from typing import Any, Iterator

import attrs

from tt_automl import MultiIndex
from tt_automl.settings import Direction


class EvalFlag(Enum):
    """Outcome of a single objective evaluation."""

    OK = "ok"
    NON_FINITE = "non_finite"


@attrs.frozen
class TraceEntry:
    """One unique objective evaluation."""

    index: MultiIndex
    value: float
    ordinal: int
    flag: EvalFlag = EvalFlag.OK


@attrs.define
class OptimizationTrace:
    """Evaluations in the order they happened, ordinals counting from 1."""

    algo: str
    seed: int
    direction: Direction = Direction.MAXIMIZE
    config: dict[str, Any] = attrs.field(factory=dict)
    entries: list[TraceEntry] = attrs.field(factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TraceEntry]:
        return iter(self.entries)

    def append(
        self, index: MultiIndex, value: float, flag: EvalFlag = EvalFlag.OK
    ) -> TraceEntry:
        entry = TraceEntry(index, value, len(self.entries) + 1, flag)
        self.entries.append(entry)
        return entry

    def best(self) -> TraceEntry | None:
        """The earliest entry holding the optimal value."""
        best: TraceEntry | None = None
        for entry in self.entries:
            if best is None or self.direction.is_better(entry.value, best.value):
                best = entry
        return best

    def best_so_far(self) -> list[float]:
        series: list[float] = []
        current = self.direction.worst()
        for entry in self.entries:
            if self.direction.is_better(entry.value, current):
                current = entry.value
            series.append(current)
        return series

    def indices(self) -> list[MultiIndex]:
        return [entry.index for entry in self.entries]

    def csv_rows(self) -> Iterator[tuple[str, int, int, float, float]]:
        """Rows in the column order of TRACE_CSV_COLUMNS."""
        for entry, best in zip(self.entries, self.best_so_far()):
            yield (self.algo, self.seed, entry.ordinal, entry.value, best)
