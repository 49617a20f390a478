"""Synthetic objectives on discretized grids with known optima."""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable

import attrs
import numpy as np

from tt_automl import MultiIndex, as_multi_index
from tt_automl.constants import EXHAUSTIVE_OPTIMUM_CAP
from tt_automl.harness.search_space import (
    DiscretizedReal,
    SearchSpace,
    categorical_space,
)
from tt_automl.harness.tabular import BenchmarkError
from tt_automl.logger import get_logger
from tt_automl.rng import Rng
from tt_automl.settings import Direction
from tt_automl.utils import grid_size

_logger = get_logger(__file__)


@attrs.define
class UnknownSyntheticError(BenchmarkError):
    """Name is not a known synthetic function."""

    name: str

    def __str__(self) -> str:
        names = ", ".join(str(n) for n in SyntheticName)
        return f"unknown synthetic objective '{self.name}' (known: {names})"


@attrs.define
class SyntheticArgumentError(BenchmarkError):
    """Invalid dimension count or grid resolution."""

    detail: str

    def __str__(self) -> str:
        return self.detail


class SyntheticName(Enum):
    """Available synthetic objectives."""

    ACKLEY = "ackley"
    ROSENBROCK = "rosenbrock"
    SCHWEFEL = "schwefel"
    SEPARABLE_PLANTED = "separable_planted"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> SyntheticName:
        try:
            return cls(name)
        except ValueError as exception:
            raise UnknownSyntheticError(name) from exception


def ackley(x: np.ndarray) -> np.ndarray:
    d = x.shape[-1]
    return (
        -20.0 * np.exp(-0.2 * np.sqrt(np.sum(x**2, axis=-1) / d))
        - np.exp(np.sum(np.cos(2.0 * np.pi * x), axis=-1) / d)
        + 20.0
        + math.e
    )


def rosenbrock(x: np.ndarray) -> np.ndarray:
    head, tail = x[..., :-1], x[..., 1:]
    return np.sum(100.0 * (tail - head**2) ** 2 + (1.0 - head) ** 2, axis=-1)


def schwefel(x: np.ndarray) -> np.ndarray:
    d = x.shape[-1]
    return 418.9829 * d - np.sum(x * np.sin(np.sqrt(np.abs(x))), axis=-1)


# canonical box and the analytic minimizer (per coordinate)
_CONTINUOUS: dict[SyntheticName, tuple[Callable[[np.ndarray], np.ndarray], float, float, float]] = {
    SyntheticName.ACKLEY: (ackley, -32.768, 32.768, 0.0),
    SyntheticName.ROSENBROCK: (rosenbrock, -2.048, 2.048, 1.0),
    SyntheticName.SCHWEFEL: (schwefel, -500.0, 500.0, 420.9687),
}


@attrs.define
class SyntheticProblem:
    """A grid objective with its optimization direction and known optimum."""

    name: SyntheticName
    space: SearchSpace
    direction: Direction
    values_at: Callable[[np.ndarray], np.ndarray]
    optimum_index: MultiIndex = ()
    optimum_value: float = math.nan

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.sizes

    def __call__(self, index: MultiIndex) -> float:
        return float(self.values_at(np.asarray([index]))[0])

    def objective(self, index: MultiIndex) -> float:
        return self(index)


def _grid_coordinates(space: SearchSpace, indices: np.ndarray) -> np.ndarray:
    """Reals of an (m, d) index array, computed like DiscretizedReal.value."""
    coords = np.empty(indices.shape, dtype=np.float64)
    for k, dim in enumerate(space.dims):
        assert isinstance(dim, DiscretizedReal)
        table = np.array([dim.value(i) for i in range(dim.size)])
        coords[:, k] = table[indices[:, k]]
    return coords


def _exhaustive_optimum(problem: SyntheticProblem) -> tuple[MultiIndex, float]:
    dims = problem.dims
    indices = np.indices(dims).reshape(len(dims), -1).T
    values = problem.values_at(indices)
    flat = int(
        np.argmax(values) if problem.direction is Direction.MAXIMIZE else np.argmin(values)
    )
    return as_multi_index(indices[flat]), float(values[flat])


def synthetic(
    name: str | SyntheticName, dims: int, points_per_dim: int, seed: int = 0
) -> SyntheticProblem:
    """Objective on the points_per_dim^dims grid over the function's canonical box.

    The known optimum is found by exhaustive scan for grids up to 10^6 points,
    otherwise it is the grid point nearest the analytic minimizer.
    """
    if not isinstance(name, SyntheticName):
        name = SyntheticName.parse(name)
    if dims < 1 or points_per_dim < 2:
        raise SyntheticArgumentError(
            f"need dims >= 1 and points_per_dim >= 2, got {dims} and {points_per_dim}"
        )

    if name is SyntheticName.SEPARABLE_PLANTED:
        rng = Rng(seed)
        effects = np.array(
            [[rng.random() for _ in range(points_per_dim)] for _ in range(dims)]
        )
        problem = SyntheticProblem(
            name,
            categorical_space([points_per_dim] * dims),
            Direction.MAXIMIZE,
            lambda idx: effects[np.arange(dims), np.asarray(idx)].sum(axis=-1),
        )
        problem.optimum_index = as_multi_index(np.argmax(effects, axis=1))
        problem.optimum_value = float(problem(problem.optimum_index))
        return problem

    function, lo, hi, minimizer = _CONTINUOUS[name]
    space = SearchSpace([DiscretizedReal(lo, hi, points_per_dim)] * dims)
    problem = SyntheticProblem(
        name,
        space,
        Direction.MINIMIZE,
        lambda idx: function(_grid_coordinates(space, np.asarray(idx))),
    )
    if grid_size(problem.dims) <= EXHAUSTIVE_OPTIMUM_CAP:
        problem.optimum_index, problem.optimum_value = _exhaustive_optimum(problem)
    else:
        step = (hi - lo) / (points_per_dim - 1)
        nearest = min(max(round((minimizer - lo) / step), 0), points_per_dim - 1)
        problem.optimum_index = (nearest,) * dims
        problem.optimum_value = problem(problem.optimum_index)
    _logger.debug(
        f"{name} on {points_per_dim}^{dims}: optimum {problem.optimum_value:g} at "
        f"{problem.optimum_index}"
    )
    return problem
