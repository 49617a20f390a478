"""Discrete mixed search spaces and their JSON form."""

from __future__ import annotations

import json
import math
from typing import Any, Sequence

import attrs

from tt_automl import MultiIndex
from tt_automl.utils import grid_size


@attrs.define
class SearchSpaceError(Exception):
    """Root of search space errors."""


@attrs.define
class MalformedSpaceError(SearchSpaceError):
    """Invalid JSON or a missing/ill-typed field."""

    detail: str

    def __str__(self) -> str:
        return f"malformed search space: {self.detail}"


@attrs.define
class UnknownDimensionKindError(SearchSpaceError):
    """A dimension kind other than categorical, integer_range or discretized_real."""

    kind: str

    def __str__(self) -> str:
        return f"unknown dimension kind '{self.kind}'"


@attrs.define
class EmptyDimensionError(SearchSpaceError):
    """A dimension without choices."""

    position: int

    def __str__(self) -> str:
        return f"dimension {self.position} has no choices"


@attrs.define
class InvalidPointError(SearchSpaceError):
    """A point or multi-index outside the space."""

    detail: str

    def __str__(self) -> str:
        return f"invalid point: {self.detail}"


@attrs.frozen
class Categorical:
    labels: tuple[str, ...] = attrs.field(converter=tuple)

    @property
    def size(self) -> int:
        return len(self.labels)

    def value(self, index: int) -> str:
        return self.labels[index]

    def index(self, value: Any) -> int:
        try:
            return self.labels.index(value)
        except ValueError as exception:
            raise InvalidPointError(f"'{value}' is not one of {self.labels}") from exception

    def to_json(self) -> dict[str, Any]:
        return {"kind": "categorical", "labels": list(self.labels)}


@attrs.frozen
class IntegerRange:
    """Integers lo, lo + step, ... up to and including hi."""

    lo: int
    hi: int
    step: int = 1

    @property
    def size(self) -> int:
        if self.step < 1 or self.hi < self.lo:
            return 0
        return (self.hi - self.lo) // self.step + 1

    def value(self, index: int) -> int:
        return self.lo + index * self.step

    def index(self, value: Any) -> int:
        offset = int(value) - self.lo
        if offset % self.step or not 0 <= offset // self.step < self.size:
            raise InvalidPointError(f"{value} is not on the grid {self}")
        return offset // self.step

    def to_json(self) -> dict[str, Any]:
        return {"kind": "integer_range", "lo": self.lo, "hi": self.hi, "step": self.step}


@attrs.frozen
class DiscretizedReal:
    """`points` equidistant reals from lo to hi, both endpoints included."""

    lo: float
    hi: float
    points: int

    @property
    def size(self) -> int:
        if self.points < 1 or self.hi < self.lo:
            return 0
        return self.points

    def value(self, index: int) -> float:
        if self.points == 1:
            return float(self.lo)
        return self.lo + index * (self.hi - self.lo) / (self.points - 1)

    def index(self, value: Any) -> int:
        if self.points == 1 or self.hi == self.lo:
            index = 0
        else:
            index = round((float(value) - self.lo) / (self.hi - self.lo) * (self.points - 1))
        if not 0 <= index < self.size or not math.isclose(
            self.value(index), float(value), rel_tol=1e-12, abs_tol=1e-12
        ):
            raise InvalidPointError(f"{value} is not on the grid {self}")
        return index

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": "discretized_real",
            "lo": self.lo,
            "hi": self.hi,
            "points": self.points,
        }


Dimension = Categorical | IntegerRange | DiscretizedReal


@attrs.frozen
class SearchSpace:
    """Ordered dimensions; a point is one choice per dimension."""

    dims: tuple[Dimension, ...] = attrs.field(converter=tuple)

    def __attrs_post_init__(self) -> None:
        for position, dim in enumerate(self.dims):
            if dim.size < 1:
                raise EmptyDimensionError(position)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(dim.size for dim in self.dims)

    @property
    def grid_size(self) -> int:
        return grid_size(self.sizes)

    def encode(self, point: Sequence[Any]) -> MultiIndex:
        if len(point) != len(self.dims):
            raise InvalidPointError(
                f"{len(point)} values for {len(self.dims)} dimensions"
            )
        return tuple(dim.index(value) for dim, value in zip(self.dims, point))

    def decode(self, index: Sequence[int]) -> list[Any]:
        if len(index) != len(self.dims) or any(
            not 0 <= i < n for i, n in zip(index, self.sizes)
        ):
            raise InvalidPointError(f"index {tuple(index)} outside {self.sizes}")
        return [dim.value(int(i)) for dim, i in zip(self.dims, index)]

    def to_dict(self) -> dict[str, Any]:
        return {"dims": [dim.to_json() for dim in self.dims]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _dimension_from_dict(data: Any, position: int) -> Dimension:
    if not isinstance(data, dict):
        raise MalformedSpaceError(f"dimension {position} is not an object")
    try:
        match data.get("kind"):
            case "categorical":
                labels = data["labels"]
                if not isinstance(labels, list):
                    raise MalformedSpaceError(f"labels of dimension {position}")
                dim: Dimension = Categorical([str(label) for label in labels])
            case "integer_range":
                dim = IntegerRange(int(data["lo"]), int(data["hi"]), int(data.get("step", 1)))
            case "discretized_real":
                dim = DiscretizedReal(
                    float(data["lo"]), float(data["hi"]), int(data["points"])
                )
            case kind:
                raise UnknownDimensionKindError(str(kind))
    except (KeyError, TypeError, ValueError) as exception:
        raise MalformedSpaceError(
            f"dimension {position}: {exception!r}"
        ) from exception
    if dim.size < 1:
        raise EmptyDimensionError(position)
    return dim


def space_from_dict(data: Any) -> SearchSpace:
    if not isinstance(data, dict) or not isinstance(data.get("dims"), list):
        raise MalformedSpaceError("expected an object with a 'dims' list")
    return SearchSpace(
        [_dimension_from_dict(dim, position) for position, dim in enumerate(data["dims"])]
    )


def space_from_json(text: str) -> SearchSpace:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exception:
        raise MalformedSpaceError(str(exception)) from exception
    return space_from_dict(data)


def categorical_space(sizes: Sequence[int]) -> SearchSpace:
    """Space of unnamed categorical dimensions with labels '0', '1', ..."""
    return SearchSpace([Categorical([str(i) for i in range(n)]) for n in sizes])
