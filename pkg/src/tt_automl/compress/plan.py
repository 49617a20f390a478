"""Compression plans: which actions apply to which layers.

JSON form: {"layers": {"<name>": [action, ...]}, "default": [action, ...]} with actions
{"op": "tucker2", "rank": 8}, {"op": "tucker2", "rank": "auto", "target_ratio": 3},
{"op": "ttm", "row_factors": [..], "col_factors": [..], "tol": 0.1, "max_rank": 4},
{"op": "prune", "sparsity": 0.5} and {"op": "quant", "bits": 8}.
"""

from __future__ import annotations

import json
from enum import Enum
from typing import Any

import attrs

from tt_automl.compress.quantize import SUPPORTED_BITS


@attrs.define
class PlanError(Exception):
    """Root of plan errors."""


@attrs.define
class PlanFormatError(PlanError):
    detail: str

    def __str__(self) -> str:
        return f"malformed plan: {self.detail}"


@attrs.define
class UnknownLayerError(PlanError):
    layer: str

    def __str__(self) -> str:
        return f"plan references unknown layer '{self.layer}'"


@attrs.define
class ActionTypeError(PlanError):
    """Action cannot be applied to the layer's kind."""

    layer: str
    op: str
    kind: str

    def __str__(self) -> str:
        return f"layer '{self.layer}': action '{self.op}' does not apply to {self.kind}"


class Stage(Enum):
    """Pipeline position; actions of a chain always run in this order."""

    FACTORIZE = 0
    PRUNE = 1
    QUANTIZE = 2


@attrs.frozen
class Tucker2Action:
    """Explicit rank, or the largest rank meeting target_ratio when rank is None."""

    rank: int | None = None
    target_ratio: float | None = None
    stage = Stage.FACTORIZE
    op = "tucker2"

    def describe(self) -> str:
        if self.rank is None:
            return f"tucker2(auto {self.target_ratio:g}x)"
        return f"tucker2(rank {self.rank})"


@attrs.frozen
class TTMAction:
    row_factors: tuple[int, ...]
    col_factors: tuple[int, ...]
    tol: float = 0.0
    max_rank: int | None = None
    stage = Stage.FACTORIZE
    op = "ttm"

    def describe(self) -> str:
        return f"ttm({self.row_factors}x{self.col_factors}, tol {self.tol:g})"


@attrs.frozen
class PruneAction:
    sparsity: float
    stage = Stage.PRUNE
    op = "prune"

    def describe(self) -> str:
        return f"prune({self.sparsity:g})"


@attrs.frozen
class QuantAction:
    bits: int
    stage = Stage.QUANTIZE
    op = "quant"

    def describe(self) -> str:
        return f"quant({self.bits} bit)"


Action = Tucker2Action | TTMAction | PruneAction | QuantAction


@attrs.frozen
class Plan:
    layers: dict[str, list[Action]] = attrs.field(factory=dict)
    default: list[Action] = attrs.field(factory=list)

    def is_empty(self) -> bool:
        return not self.default and not any(self.layers.values())


def _positive_int(data: dict[str, Any], key: str) -> int:
    value = data.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise PlanFormatError(f"'{key}' must be a positive integer, got {value!r}")
    return value


def _number(data: dict[str, Any], key: str, default: float | None = None) -> float:
    value = data.get(key, default)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise PlanFormatError(f"'{key}' must be a number, got {value!r}")
    return float(value)


def _factors(data: dict[str, Any], key: str) -> tuple[int, ...]:
    value = data.get(key)
    if not isinstance(value, list) or not value:
        raise PlanFormatError(f"'{key}' must be a non-empty list")
    return tuple(_positive_int({key: item}, key) for item in value)


def action_from_dict(data: Any) -> Action:
    if not isinstance(data, dict):
        raise PlanFormatError(f"action {data!r} is not an object")
    match data.get("op"):
        case "tucker2":
            if data.get("rank") == "auto":
                ratio = _number(data, "target_ratio")
                if ratio < 1.0:
                    raise PlanFormatError(f"target_ratio {ratio} is below 1")
                return Tucker2Action(target_ratio=ratio)
            return Tucker2Action(rank=_positive_int(data, "rank"))
        case "ttm":
            max_rank = data.get("max_rank")
            return TTMAction(
                _factors(data, "row_factors"),
                _factors(data, "col_factors"),
                _number(data, "tol", 0.0),
                None if max_rank is None else _positive_int(data, "max_rank"),
            )
        case "prune":
            sparsity = _number(data, "sparsity")
            if not 0.0 <= sparsity < 1.0:
                raise PlanFormatError(f"sparsity {sparsity} outside [0, 1)")
            return PruneAction(sparsity)
        case "quant":
            bits = _positive_int(data, "bits")
            if bits not in SUPPORTED_BITS:
                raise PlanFormatError(f"bits {bits} not in {SUPPORTED_BITS}")
            return QuantAction(bits)
        case op:
            raise PlanFormatError(f"unknown op {op!r}")


def _chain(data: Any, where: str) -> list[Action]:
    if not isinstance(data, list):
        raise PlanFormatError(f"{where} must be a list of actions")
    chain = [action_from_dict(item) for item in data]
    if sum(action.stage is Stage.FACTORIZE for action in chain) > 1:
        raise PlanFormatError(f"{where} has more than one factorization")
    return sorted(chain, key=lambda action: action.stage.value)


def plan_from_dict(data: Any) -> Plan:
    if not isinstance(data, dict):
        raise PlanFormatError("plan is not an object")
    layers = data.get("layers", {})
    if not isinstance(layers, dict):
        raise PlanFormatError("'layers' must be an object")
    return Plan(
        {str(name): _chain(chain, f"layer '{name}'") for name, chain in layers.items()},
        _chain(data.get("default", []), "'default'"),
    )


def plan_from_json(text: str) -> Plan:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exception:
        raise PlanFormatError(str(exception)) from exception
    return plan_from_dict(data)
