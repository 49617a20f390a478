"""Runs several optimizers over several seeds and summarizes their best-so-far curves."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterator, Sequence, assert_never

import attrs
import numpy as np

from tt_automl.constants import TRACE_CSV_COLUMNS
from tt_automl.cross_optimizer import OptConfig, optimize
from tt_automl.evaluation import Objective
from tt_automl.harness.baselines import random_search, tpe_optimize
from tt_automl.logger import get_logger
from tt_automl.settings import Algorithm, Direction
from tt_automl.trace import OptimizationTrace
from tt_automl.utils import write_csv

_logger = get_logger(__file__)


def run_algorithm(
    algo: Algorithm,
    objective: Objective,
    dims: Sequence[int],
    budget: int,
    seed: int,
    direction: Direction = Direction.MAXIMIZE,
    parallelism: int = 1,
    **options: Any,
) -> OptimizationTrace:
    """One seeded run. `options` are OptConfig fields for tetraopt and keyword
    arguments of tpe_optimize for tpe."""
    match algo:
        case Algorithm.TETRAOPT:
            cfg = OptConfig.from_settings(
                budget, seed, direction=direction, **options
            )
            return optimize(objective, dims, cfg, parallelism)
        case Algorithm.RANDOM:
            return random_search(objective, dims, budget, seed, direction, parallelism)
        case Algorithm.TPE:
            return tpe_optimize(
                objective,
                dims,
                budget,
                seed,
                direction=direction,
                parallelism=parallelism,
                **options,
            )
        case _ as unreachable:
            assert_never(unreachable)


@attrs.frozen
class Envelope:
    """Mean, minimum and maximum of best-so-far over seeds, per evaluation ordinal."""

    mean: np.ndarray
    low: np.ndarray
    high: np.ndarray

    @classmethod
    def of(cls, traces: Sequence[OptimizationTrace]) -> Envelope:
        """Shorter traces carry their final best value forward."""
        length = max((len(trace) for trace in traces), default=0)
        if length == 0:
            empty = np.zeros(0)
            return cls(empty, empty, empty)
        curves = [np.asarray(trace.best_so_far()) for trace in traces if len(trace)]
        series = np.array(
            [np.pad(curve, (0, length - len(curve)), mode="edge") for curve in curves]
        )
        return cls(series.mean(axis=0), series.min(axis=0), series.max(axis=0))


@attrs.define
class ExperimentResult:
    traces: dict[Algorithm, list[OptimizationTrace]] = attrs.field(factory=dict)
    envelopes: dict[Algorithm, Envelope] = attrs.field(factory=dict)

    def csv_rows(self) -> Iterator[tuple[str, int, int, float, float]]:
        for traces in self.traces.values():
            for trace in traces:
                yield from trace.csv_rows()

    def write_csv(self, path: Path) -> None:
        write_csv(path, TRACE_CSV_COLUMNS, self.csv_rows())

    def final_means(self) -> dict[Algorithm, float]:
        return {
            algo: float(envelope.mean[-1])
            for algo, envelope in self.envelopes.items()
            if len(envelope.mean)
        }


def run_experiment(
    algos: Sequence[Algorithm],
    objective: Objective,
    dims: Sequence[int],
    budget: int,
    seeds: Sequence[int],
    parallelism: int = 1,
    direction: Direction = Direction.MAXIMIZE,
    options: dict[Algorithm, dict[str, Any]] | None = None,
) -> ExperimentResult:
    """Every algorithm on every seed. Objective failures propagate as ObjectiveError
    naming the failing index."""
    if not seeds:
        raise ValueError("at least one seed is required")
    options = options or {}
    result = ExperimentResult()
    for algo in algos:
        result.traces[algo] = [
            run_algorithm(
                algo,
                objective,
                dims,
                budget,
                seed,
                direction,
                parallelism,
                **options.get(algo, {}),
            )
            for seed in seeds
        ]
        result.envelopes[algo] = Envelope.of(result.traces[algo])
        _logger.info(
            f"{algo}: mean best {result.final_means().get(algo)} over "
            f"{len(seeds)} seeds"
        )
    return result
