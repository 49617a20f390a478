"""Baseline optimizers: uniform random search and a categorical tree-structured Parzen
estimator (TPE)."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import attrs
import numpy as np

from tt_automl import MultiIndex
from tt_automl.cross_optimizer import OptimizerError
from tt_automl.evaluation import BatchEvaluator, Objective
from tt_automl.logger import get_logger
from tt_automl.rng import Rng
from tt_automl.settings import Algorithm, Direction
from tt_automl.trace import OptimizationTrace
from tt_automl.utils import grid_size

_logger = get_logger(__file__)

_BATCH = 32

ModelHook = Callable[[list[np.ndarray]], None]


@attrs.define
class BaselineArgumentError(OptimizerError):
    """Invalid budget or model parameters."""

    detail: str

    def __str__(self) -> str:
        return self.detail


def _uniform_index(dims: Sequence[int], rng: Rng) -> MultiIndex:
    return tuple(rng.integer(n) for n in dims)


def _unique_sample(
    dims: Sequence[int], count: int, rng: Rng, exclude: set[MultiIndex] | None = None
) -> list[MultiIndex]:
    """`count` distinct uniform indices not in `exclude`, by rejection. The caller
    guarantees enough free points."""
    exclude = exclude or set()
    chosen: dict[MultiIndex, None] = {}
    while len(chosen) < count:
        index = _uniform_index(dims, rng)
        if index not in exclude:
            chosen[index] = None
    return list(chosen)


def _evaluate_in_batches(evaluator: BatchEvaluator, indices: list[MultiIndex]) -> None:
    for start in range(0, len(indices), _BATCH):
        evaluator.evaluate(indices[start : start + _BATCH])


def random_search(
    objective: Objective,
    dims: Sequence[int],
    budget: int,
    seed: int,
    direction: Direction = Direction.MAXIMIZE,
    parallelism: int = 1,
) -> OptimizationTrace:
    """Uniform sampling without replacement until `budget` unique evaluations; a budget
    covering the grid evaluates the whole grid in seeded random order."""
    if budget < 1:
        raise BaselineArgumentError(f"budget must be positive, got {budget}")
    rng = Rng(seed)
    logger = get_logger(__file__, f"{Algorithm.RANDOM}#{seed}")
    trace = OptimizationTrace(
        str(Algorithm.RANDOM), seed, direction, {"budget": budget, "dims": list(dims)}
    )
    evaluator = BatchEvaluator(objective, trace, budget, parallelism, logger)
    total = grid_size(dims)
    if budget >= total:
        order = [tuple(int(i) for i in idx) for idx in np.ndindex(*dims)]
        rng.shuffle(order)
    else:
        order = _unique_sample(dims, budget, rng)
    _evaluate_in_batches(evaluator, order)
    logger.info(f"evaluated {len(trace)} of {total} points")
    return trace


def _good_bad_split(
    trace: OptimizationTrace, gamma: float
) -> tuple[list[MultiIndex], list[MultiIndex]]:
    """Best ceil(gamma * n) entries (ties to the earlier ordinal) versus the rest."""
    sign = trace.direction.sign()
    ranked = sorted(trace.entries, key=lambda e: (-sign * e.value, e.ordinal))
    n_good = max(1, math.ceil(gamma * len(ranked)))
    return (
        [entry.index for entry in ranked[:n_good]],
        [entry.index for entry in ranked[n_good:]],
    )


def _categorical_model(
    indices: list[MultiIndex], dims: Sequence[int]
) -> list[np.ndarray]:
    """Per-dimension choice probabilities with add-one smoothing."""
    model = []
    for k, n in enumerate(dims):
        counts = np.ones(n)
        for index in indices:
            counts[index[k]] += 1.0
        model.append(counts / counts.sum())
    return model


def _sample(model: list[np.ndarray], rng: Rng) -> MultiIndex:
    index = []
    for probabilities in model:
        cumulative = np.cumsum(probabilities)
        pick = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], "right"))
        index.append(min(pick, len(probabilities) - 1))
    return tuple(index)


def _log_likelihood(model: list[np.ndarray], index: MultiIndex) -> float:
    return float(sum(math.log(p[i]) for p, i in zip(model, index)))


def tpe_optimize(
    objective: Objective,
    dims: Sequence[int],
    budget: int,
    seed: int,
    gamma: float = 0.25,
    candidates: int = 24,
    startup: int = 20,
    direction: Direction = Direction.MAXIMIZE,
    parallelism: int = 1,
    on_model: ModelHook | None = None,
) -> OptimizationTrace:
    """TPE over categorical dimensions.

    After `startup` random evaluations every step splits the trials at the gamma
    quantile, fits smoothed per-dimension distributions to the good and bad trials,
    samples `candidates` points from the good model and evaluates the unseen one with
    the highest good/bad likelihood ratio. `on_model` receives the good model of
    every step.
    """
    if budget < startup:
        raise BaselineArgumentError(f"budget {budget} is below startup {startup}")
    if not 0.0 < gamma < 1.0 or candidates < 1 or startup < 1:
        raise BaselineArgumentError(
            f"invalid gamma {gamma}, candidates {candidates} or startup {startup}"
        )
    rng = Rng(seed)
    logger = get_logger(__file__, f"{Algorithm.TPE}#{seed}")
    trace = OptimizationTrace(
        str(Algorithm.TPE),
        seed,
        direction,
        {
            "budget": budget,
            "dims": list(dims),
            "gamma": gamma,
            "candidates": candidates,
            "startup": startup,
        },
    )
    evaluator = BatchEvaluator(objective, trace, budget, parallelism, logger)
    total = grid_size(dims)
    _evaluate_in_batches(evaluator, _unique_sample(dims, min(startup, total), rng))

    seen = set(trace.indices())
    while not evaluator.exhausted() and len(seen) < total:
        good, bad = _good_bad_split(trace, gamma)
        good_model = _categorical_model(good, dims)
        bad_model = _categorical_model(bad, dims)
        if on_model:
            on_model(good_model)
        best: MultiIndex | None = None
        best_score = -math.inf
        for _ in range(candidates):
            candidate = _sample(good_model, rng)
            if candidate in seen:
                continue
            score = _log_likelihood(good_model, candidate) - _log_likelihood(
                bad_model, candidate
            )
            if score > best_score:
                best, best_score = candidate, score
        if best is None:
            best = _unique_sample(dims, 1, rng, seen)[0]
        evaluator.evaluate([best])
        seen.add(best)
    if len(seen) >= total:
        logger.info(f"grid exhausted after {len(trace)} evaluations")
    return trace
