"""Tensor-train optimization and neural-network compression toolkit."""

from __future__ import annotations

from typing import Iterable

MultiIndex = tuple[int, ...]


def as_multi_index(value: Iterable[int]) -> MultiIndex:
    """Coerces lists, numpy rows and tuples of integers to a hashable MultiIndex."""
    return tuple(int(i) for i in value)
