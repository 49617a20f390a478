"""Black-box maximization (or minimization) over a discrete grid by sweeping the index
sets of a TT-cross approximation.

Every entry queried for the cross approximation is also an optimization candidate; the
result is the best point ever evaluated, never a value read off an approximation.
"""

from __future__ import annotations

import math
from typing import Any, Container, Sequence

import attrs
import numpy as np
import scipy.linalg

from tt_automl import MultiIndex
from tt_automl.constants import EXP_SHIFT_BETA, MAXVOL_DELTA
from tt_automl.evaluation import BatchEvaluator, Objective
from tt_automl.linalg import numerical_rank
from tt_automl.logger import Log, get_logger
from tt_automl.maxvol import maxvol
from tt_automl.rng import Rng
from tt_automl.settings import (
    Algorithm,
    Direction,
    Transform,
    get_beta,
    get_delta,
    get_rank,
    get_sweeps,
    get_transform,
)
from tt_automl.trace import OptimizationTrace
from tt_automl.utils import grid_size

# small suffix spaces are enumerated instead of rejection sampled
_ENUMERATION_FACTOR = 4


@attrs.define
class OptimizerError(Exception):
    """Root of optimizer errors."""


@attrs.define
class BudgetTooSmallError(OptimizerError):
    """The budget does not cover one core block."""

    budget: int
    required: int

    def __str__(self) -> str:
        return (
            f"budget {self.budget} is smaller than one core block "
            f"(rank^2 * max mode size = {self.required})"
        )


@attrs.define
class InvalidDimensionsError(OptimizerError):
    """Empty grid or a mode without choices."""

    dims: tuple[int, ...]

    def __str__(self) -> str:
        return f"every mode needs at least one choice, got {self.dims}"


@attrs.frozen
class OptConfig:
    """Parameters of one optimizer run."""

    rank: int = attrs.field(default=4, validator=attrs.validators.ge(1))
    sweeps: int = attrs.field(default=4, validator=attrs.validators.ge(1))
    budget: int = attrs.field(default=1000, validator=attrs.validators.ge(1))
    seed: int = 0
    direction: Direction = Direction.MAXIMIZE
    delta: float = attrs.field(default=MAXVOL_DELTA, validator=attrs.validators.ge(0.0))
    transform: Transform = Transform.IDENTITY
    beta: float = attrs.field(default=EXP_SHIFT_BETA, validator=attrs.validators.gt(0.0))

    @classmethod
    def from_settings(cls, budget: int, seed: int = 0, **overrides: Any) -> OptConfig:
        """Config with persistent defaults; keyword overrides win."""
        config = cls(
            rank=get_rank(),
            sweeps=get_sweeps(),
            budget=budget,
            seed=seed,
            delta=get_delta(),
            transform=get_transform(),
            beta=get_beta(),
        )
        return attrs.evolve(config, **overrides)

    def min_budget(self, dims: Sequence[int]) -> int:
        return self.rank**2 * max(dims)

    def snapshot(self) -> dict[str, Any]:
        return attrs.asdict(
            self,
            value_serializer=lambda _inst, _field, value: (
                str(value) if isinstance(value, (Direction, Transform)) else value
            ),
        )


@attrs.define
class IndexSets:
    """left[k] holds prefixes over modes 0..k-1, right[k] suffixes over modes
    k+1..d-1; the sentinels left[0] and right[d-1] contain only the empty index."""

    left: list[list[MultiIndex]]
    right: list[list[MultiIndex]]

    @classmethod
    def initial(cls, dims: Sequence[int], rank: int, rng: Rng) -> IndexSets:
        """Empty left sets and seeded random right sets of up to `rank` suffixes."""
        d = len(dims)
        left: list[list[MultiIndex]] = [[()] for _ in range(d)]
        right: list[list[MultiIndex]] = [[()] for _ in range(d)]
        for k in range(d - 2, -1, -1):
            right[k] = random_suffixes(dims[k + 1 :], rank, rng)
        return cls(left, right)

    def block_shape(self, k: int, n_k: int) -> tuple[int, int, int]:
        return len(self.left[k]), n_k, len(self.right[k])


def random_suffixes(dims: Sequence[int], count: int, rng: Rng) -> list[MultiIndex]:
    """Up to `count` distinct uniform multi-indices over `dims`."""
    size = grid_size(dims)
    count = min(count, size)
    if size <= _ENUMERATION_FACTOR * count:
        every = [tuple(int(i) for i in idx) for idx in np.ndindex(*dims)]
        rng.shuffle(every)
        return every[:count]
    chosen: dict[MultiIndex, None] = {}
    while len(chosen) < count:
        chosen[tuple(rng.integer(n) for n in dims)] = None
    return list(chosen)


def query_block(
    sets: IndexSets, k: int, n_k: int, seen: Container[MultiIndex] | None = None
) -> list[MultiIndex]:
    """All (prefix, i_k, suffix) points at position k: left-major, then mode, then
    right. Points contained in `seen` are left out."""
    block = [
        prefix + (i,) + suffix
        for prefix in sets.left[k]
        for i in range(n_k)
        for suffix in sets.right[k]
    ]
    if seen is not None:
        block = [index for index in block if index not in seen]
    return block


class CrossOptimizer:
    """State of one run: index sets, evaluator and trace."""

    def __init__(
        self,
        objective: Objective,
        dims: Sequence[int],
        cfg: OptConfig,
        parallelism: int = 1,
        logger: Log | None = None,
    ) -> None:
        self.dims = tuple(int(n) for n in dims)
        if not self.dims or any(n < 1 for n in self.dims):
            raise InvalidDimensionsError(self.dims)
        if cfg.budget < (required := cfg.min_budget(self.dims)):
            raise BudgetTooSmallError(cfg.budget, required)
        self.cfg = cfg
        self.logger = logger or get_logger(__file__, f"{Algorithm.TETRAOPT}#{cfg.seed}")
        self.rng = Rng(cfg.seed)
        self.trace = OptimizationTrace(
            str(Algorithm.TETRAOPT), cfg.seed, cfg.direction, cfg.snapshot()
        )
        self.evaluator = BatchEvaluator(
            objective, self.trace, cfg.budget, parallelism, self.logger
        )
        self.sets = IndexSets.initial(self.dims, cfg.rank, self.rng)

    def run(self) -> OptimizationTrace:
        d = len(self.dims)
        for sweep in range(1, self.cfg.sweeps + 1):
            for k in range(d):
                if (block := self._evaluate_block(k)) is None:
                    return self._finish("budget exhausted")
                if k < d - 1:
                    self.sets.left[k + 1] = self._select_prefixes(k, block)
            for k in range(d - 1, -1, -1):
                if (block := self._evaluate_block(k)) is None:
                    return self._finish("budget exhausted")
                if k > 0:
                    self.sets.right[k - 1] = self._select_suffixes(k, block)
            best = self.trace.best()
            self.logger.info(
                f"sweep {sweep} finished after {self.evaluator.calls} evaluations, "
                f"best {best.value if best else None}"
            )
        return self._finish("sweeps done")

    def _finish(self, reason: str) -> OptimizationTrace:
        self.logger.debug(f"stopped: {reason}")
        return self.trace

    def _evaluate_block(self, k: int) -> np.ndarray | None:
        """Values of the block at k as a (left, mode, right) array, or None if the
        budget ran out before the block was complete."""
        block = query_block(self.sets, k, self.dims[k])
        values = self.evaluator.evaluate(block)
        if len(values) < len(set(block)):
            return None
        shape = self.sets.block_shape(k, self.dims[k])
        return np.array([values[index] for index in block]).reshape(shape)

    def _scores(self, values: np.ndarray) -> np.ndarray:
        """Larger-is-better scores with every entry finite."""
        scores = self.cfg.direction.sign() * values
        finite = np.isfinite(scores)
        match self.cfg.transform:
            case Transform.IDENTITY:
                fill = scores[finite].min() if finite.any() else 0.0
                return np.where(finite, scores, fill)
            case Transform.EXP_SHIFT:
                best = self.trace.best()
                if best is None or not math.isfinite(best.value):
                    return np.zeros_like(scores)
                shift = self.cfg.direction.sign() * best.value
                # non-finite scores are -inf and map to 0
                return np.exp(self.cfg.beta * (scores - shift))
        raise AssertionError(self.cfg.transform)

    def _select_rows(self, matrix: np.ndarray) -> list[int]:
        """maxvol rows of the orthonormal column basis, deduplicated and backfilled
        with random unused rows up to min(rank, rows)."""
        target = min(self.cfg.rank, matrix.shape[0])
        q, r, _ = scipy.linalg.qr(matrix, mode="economic", pivoting=True)
        usable = min(numerical_rank(np.diag(r)), target)
        chosen: list[int] = []
        if usable:
            chosen = maxvol(q[:, :usable], delta=self.cfg.delta).row_indices
        chosen = list(dict.fromkeys(chosen))
        if len(chosen) < target:
            unused = [row for row in range(matrix.shape[0]) if row not in chosen]
            self.rng.shuffle(unused)
            self.logger.debug(
                f"backfilling {target - len(chosen)} of {target} rows "
                f"(numerical rank {usable})"
            )
            chosen.extend(unused[: target - len(chosen)])
        return sorted(chosen)

    def _select_prefixes(self, k: int, values: np.ndarray) -> list[MultiIndex]:
        n_left, n_k, n_right = values.shape
        matrix = self._scores(values).reshape(n_left * n_k, n_right)
        return [
            self.sets.left[k][row // n_k] + (row % n_k,)
            for row in self._select_rows(matrix)
        ]

    def _select_suffixes(self, k: int, values: np.ndarray) -> list[MultiIndex]:
        n_left, n_k, n_right = values.shape
        matrix = (
            self._scores(values).transpose(1, 2, 0).reshape(n_k * n_right, n_left)
        )
        return [
            (row // n_right,) + self.sets.right[k][row % n_right]
            for row in self._select_rows(matrix)
        ]


def optimize(
    objective: Objective,
    dims: Sequence[int],
    cfg: OptConfig,
    parallelism: int = 1,
) -> OptimizationTrace:
    """Runs the cross optimizer and returns the trace of every unique evaluation.

    Raises BudgetTooSmallError before any evaluation if the budget cannot pay for one
    core block.
    """
    return CrossOptimizer(objective, dims, cfg, parallelism).run()
