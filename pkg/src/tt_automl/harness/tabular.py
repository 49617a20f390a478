"""Tabular benchmarks: a precomputed accuracy for every point of a finite search space.

NATS-style topology tables (6 edges x 5 operations) are ingested from user exports;
`generate_planted_table` builds synthetic tables of that shape with a known optimum.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Sequence

import attrs
import numpy as np

from tt_automl import MultiIndex, as_multi_index
from tt_automl.constants import NATS_EDGES, NATS_OPERATIONS, Reference
from tt_automl.container import ContainerData, DType
from tt_automl.evaluation import Objective
from tt_automl.harness.search_space import (
    Categorical,
    SearchSpace,
    SearchSpaceError,
    categorical_space,
    space_from_dict,
)
from tt_automl.logger import get_logger
from tt_automl.rng import Rng
from tt_automl.utils import read_csv

_logger = get_logger(__file__)

TABLE_ENTRY = "table"


@attrs.define
class BenchmarkError(Exception):
    """Root of benchmark errors."""


@attrs.define
class TabularIncompleteError(BenchmarkError):
    """Grid points without a table value."""

    missing: int

    def __str__(self) -> str:
        return f"table is incomplete: {self.missing} grid points missing"


@attrs.define
class AccuracyRangeError(BenchmarkError):
    """A table value outside [0, 100]."""

    value: float
    index: MultiIndex

    def __str__(self) -> str:
        return f"accuracy {self.value} at {self.index} is outside [0, 100]"


@attrs.define
class TableShapeError(BenchmarkError):
    """Table shape differs from the space's mode sizes."""

    shape: tuple[int, ...]
    expected: tuple[int, ...]

    def __str__(self) -> str:
        return f"table shape {self.shape} does not match space sizes {self.expected}"


@attrs.define
class InvalidArchError(BenchmarkError):
    """Architecture string not in the NATS topology format."""

    arch: str

    def __str__(self) -> str:
        return f"cannot parse architecture '{self.arch}'"


@attrs.define
class InvalidTableFileError(BenchmarkError):
    """Benchmark file lacks data or metadata."""

    detail: str

    def __str__(self) -> str:
        return f"invalid benchmark: {self.detail}"


@attrs.define
class TabularBenchmark:
    """Complete table of accuracies over a search space."""

    space: SearchSpace
    table: np.ndarray = attrs.field(converter=lambda t: np.asarray(t, dtype=np.float64))
    name: str = "tabular"
    metric: str = "validation accuracy"

    def __attrs_post_init__(self) -> None:
        if self.table.shape != self.space.sizes:
            raise TableShapeError(self.table.shape, self.space.sizes)
        if missing := int(np.count_nonzero(~np.isfinite(self.table))):
            raise TabularIncompleteError(missing)
        outside = (self.table < 0.0) | (self.table > 100.0)
        if outside.any():
            index = as_multi_index(np.argwhere(outside)[0])
            raise AccuracyRangeError(float(self.table[index]), index)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.sizes

    def value(self, index: Sequence[int]) -> float:
        return float(self.table[tuple(index)])

    def best(self) -> tuple[MultiIndex, float]:
        """Arg-max with ties resolved to the lowest linear index."""
        flat = int(np.argmax(self.table))
        index = as_multi_index(np.unravel_index(flat, self.table.shape))
        return index, self.value(index)

    def to_container(self) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
        return (
            {TABLE_ENTRY: self.table.astype(DType.F32.numpy)},
            {"space": self.space.to_dict(), "name": self.name, "metric": self.metric},
        )


def tabular_load(data: ContainerData) -> TabularBenchmark:
    """Benchmark from a container with a "table" f32 entry and the space in meta."""
    if TABLE_ENTRY not in data:
        raise InvalidTableFileError(f"no '{TABLE_ENTRY}' entry")
    if "space" not in data.meta:
        raise InvalidTableFileError("no 'space' in metadata")
    space = space_from_dict(data.meta["space"])
    return TabularBenchmark(
        space,
        data[TABLE_ENTRY],
        name=str(data.meta.get("name", "tabular")),
        metric=str(data.meta.get("metric", "validation accuracy")),
    )


def tabular_objective(benchmark: TabularBenchmark) -> Objective:
    return benchmark.value


def reference_reachable(
    benchmark: TabularBenchmark,
    reference: float = Reference.TT_OPT_ACCURACY,
    tolerance: float = 0.05,
) -> bool:
    """Whether the table's maximum matches a published best accuracy. Meaningful only
    for real NATS exports."""
    return math.isclose(benchmark.best()[1], reference, abs_tol=tolerance)


def nats_space() -> SearchSpace:
    """Cell topology space: one operation for each of the 6 edges."""
    return SearchSpace([Categorical(NATS_OPERATIONS) for _ in range(NATS_EDGES)])


def parse_nats_arch(arch: str) -> list[str]:
    """Operations in edge order from '|op~0|+|op~0|op~1|+|op~0|op~1|op~2|'."""
    operations: list[str] = []
    nodes = arch.strip().split("+")
    for node, text in enumerate(nodes, start=1):
        edges = [edge for edge in text.strip().split("|") if edge]
        if len(edges) != node:
            raise InvalidArchError(arch)
        for source, edge in enumerate(edges):
            operation, _, origin = edge.partition("~")
            if origin != str(source) or operation not in NATS_OPERATIONS:
                raise InvalidArchError(arch)
            operations.append(operation)
    if len(operations) != NATS_EDGES:
        raise InvalidArchError(arch)
    return operations


def tabular_from_csv(path: Path, name: str = "nats-topology") -> TabularBenchmark:
    """Builds the complete topology table from a CSV export with columns
    `arch,accuracy`."""
    space = nats_space()
    table = np.full(space.sizes, np.nan)
    try:
        rows = read_csv(path)
    except (OSError, UnicodeDecodeError) as exception:
        raise InvalidTableFileError(f"{path}: {exception}") from exception
    for line, row in enumerate(rows, start=2):
        try:
            index = space.encode(parse_nats_arch(row["arch"]))
            accuracy = float(row["accuracy"])
        except (KeyError, TypeError, ValueError, SearchSpaceError) as exception:
            raise InvalidTableFileError(f"{path} line {line}: {exception}") from exception
        if not np.isnan(table[index]):
            _logger.warning(f"{path} line {line}: duplicate architecture, keeping last")
        table[index] = accuracy
    return TabularBenchmark(space, table, name=name)


@attrs.frozen
class PlantedTable:
    """Synthetic benchmark together with its planted optimum."""

    benchmark: TabularBenchmark
    planted: MultiIndex


def generate_planted_table(
    dims: Sequence[int] = (len(NATS_OPERATIONS),) * NATS_EDGES,
    seed: int = 0,
    noise: float = 0.3,
    coupling: float = 0.3,
) -> PlantedTable:
    """NATS-shaped table: base accuracy plus per-dimension effects in which the planted
    choice is best, weak coupling of neighbouring dimensions and Gaussian noise. The
    planted index finally receives a bump making it the strict global maximum."""
    rng = Rng(seed)
    dims = tuple(int(n) for n in dims)
    d = len(dims)
    planted = tuple(rng.integer(n) for n in dims)
    table = np.full(dims, 60.0)
    for k, n in enumerate(dims):
        effects = np.array([rng.uniform(0.0, 3.0) for _ in range(n)])
        effects[planted[k]] = effects.max() + rng.uniform(0.5, 1.5)
        table += effects.reshape([n if axis == k else 1 for axis in range(d)])
    for k in range(d - 1):
        pair = coupling * np.array(rng.normals(dims[k] * dims[k + 1]))
        shape = [dims[axis] if axis in (k, k + 1) else 1 for axis in range(d)]
        table += pair.reshape(shape)
    table += noise * np.array(rng.normals(table.size)).reshape(dims)
    # at most 99 before the bump, so the planted value is a strict maximum <= 100
    table = np.clip(table, 0.0, 99.0)
    table[planted] = table.max() + 1.0
    space = categorical_space(dims)
    if dims == (len(NATS_OPERATIONS),) * NATS_EDGES:
        space = nats_space()
    _logger.debug(f"planted optimum {planted} with value {table[planted]:.3f}")
    return PlantedTable(
        TabularBenchmark(space, table, name=f"planted-{seed}"), planted
    )
