"""Applies a compression plan to a model and accounts for every parameter.

Each layer runs its actions in the fixed order factorize, prune, quantize. Layers are
independent and may be compressed concurrently; the report lists them in model order.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Sequence

import attrs
import numpy as np

from tt_automl.compress.plan import (
    Action,
    ActionTypeError,
    Plan,
    PlanError,
    PruneAction,
    QuantAction,
    TTMAction,
    Tucker2Action,
    UnknownLayerError,
)
from tt_automl.compress.quantize import QuantizedTensor, dequantize, quantize_uniform
from tt_automl.compress.sparsity import prune_magnitude
from tt_automl.compress.ttm import FactorMismatchError, TTMatrix, ttm_decompose
from tt_automl.compress.tucker2 import (
    RankRangeError,
    Tucker2Factors,
    auto_rank,
    cp_param_count,
    tucker2_decompose,
    tucker2_reconstruct,
)
from tt_automl.logger import get_logger
from tt_automl.nn.model import Layer, LayerKind, ModelGraph

_logger = get_logger(__file__)

_FLOAT_BYTES = 4
_PARAMETRIC = (
    LayerKind.CONV2D,
    LayerKind.DENSE,
    LayerKind.CONV2D_TUCKER2,
    LayerKind.DENSE_TTM,
)


@attrs.define
class ActionValueError(PlanError):
    """An action's parameters do not fit the layer, e.g. rank above channel count."""

    layer: str
    detail: str

    def __str__(self) -> str:
        return f"layer '{self.layer}': {self.detail}"


@attrs.frozen
class LayerReport:
    name: str
    kind: str
    params_before: int
    params_after: int
    rel_error: float
    actions: list[str]
    bytes_before: int
    bytes_after: int
    rank: int | None = None
    # cost of a CP decomposition at the same rank, for comparison
    cp_params: int | None = None


@attrs.define
class CompressionReport:
    layers: list[LayerReport] = attrs.field(factory=list)
    accuracy_before: float | None = None
    accuracy_after: float | None = None
    accuracy_finetuned: float | None = None

    @property
    def params_before(self) -> int:
        return sum(layer.params_before for layer in self.layers)

    @property
    def params_after(self) -> int:
        return sum(layer.params_after for layer in self.layers)

    @property
    def bytes_before(self) -> int:
        return sum(layer.bytes_before for layer in self.layers)

    @property
    def bytes_after(self) -> int:
        return sum(layer.bytes_after for layer in self.layers)

    @property
    def coefficient(self) -> float:
        if not self.params_after:
            return 1.0
        return self.params_before / self.params_after

    def to_dict(self) -> dict[str, Any]:
        return {
            "layers": self.layers,
            "totals": {
                "params_before": self.params_before,
                "params_after": self.params_after,
                "bytes_before": self.bytes_before,
                "bytes_after": self.bytes_after,
            },
            "coefficient": self.coefficient,
            "accuracy_before": self.accuracy_before,
            "accuracy_after": self.accuracy_after,
            "accuracy_finetuned": self.accuracy_finetuned,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), cls=CompressionReportEncoder, indent=2)


class CompressionReportEncoder(json.JSONEncoder):
    """Custom JSON encoder"""

    def default(self, o: Any) -> Any:
        if isinstance(o, LayerReport):
            return attrs.asdict(o, recurse=False)
        if isinstance(o, np.generic):
            return o.item()
        return super().default(o)


def effective_weight(layer: Layer) -> np.ndarray | None:
    """The dense kernel or matrix a parametric layer applies."""
    match layer.kind:
        case LayerKind.CONV2D | LayerKind.DENSE:
            return layer.params["weight"]
        case LayerKind.CONV2D_TUCKER2:
            return tucker2_reconstruct(
                Tucker2Factors(
                    layer.params["u_in"], layer.params["core"], layer.params["u_out"]
                )
            )
        case LayerKind.DENSE_TTM:
            return TTMatrix(layer.ttm_cores()).to_matrix()
    return None


def compatible(action: Action, layer: Layer) -> bool:
    match action:
        case Tucker2Action():
            return layer.kind is LayerKind.CONV2D
        case TTMAction():
            return layer.kind is LayerKind.DENSE
        case PruneAction() | QuantAction():
            return layer.kind in _PARAMETRIC
    return False


def _tucker2(layer: Layer, action: Tucker2Action) -> tuple[Layer, int, float]:
    weight = layer.params["weight"]
    c_out, c_in, kernel, _ = weight.shape
    rank = action.rank or auto_rank(c_in, c_out, kernel, action.target_ratio or 1.0)
    try:
        result = tucker2_decompose(weight, rank)
    except RankRangeError as exception:
        raise ActionValueError(layer.name, str(exception)) from exception
    factors = result.factors
    return (
        Layer(
            layer.name,
            LayerKind.CONV2D_TUCKER2,
            {
                "u_in": factors.u_in,
                "core": factors.core,
                "u_out": factors.u_out,
                "bias": layer.params["bias"],
            },
            {"stride": layer.stride, "padding": layer.padding},
        ),
        rank,
        result.rel_error,
    )


def _ttm(layer: Layer, action: TTMAction) -> Layer:
    try:
        ttm, _ = ttm_decompose(
            layer.params["weight"],
            action.row_factors,
            action.col_factors,
            action.tol,
            action.max_rank,
        )
    except FactorMismatchError as exception:
        raise ActionValueError(layer.name, str(exception)) from exception
    params = {f"core{k}": core for k, core in enumerate(ttm.cores)}
    params["bias"] = layer.params["bias"]
    return Layer(layer.name, LayerKind.DENSE_TTM, params, {"cores": len(ttm.cores)})


def _weight_names(layer: Layer) -> list[str]:
    return [name for name in layer.params if name != "bias"]


def compress_layer(layer: Layer, actions: Sequence[Action]) -> tuple[Layer, LayerReport]:
    """Runs the (already ordered) actions on one layer."""
    logger = get_logger(__file__, layer.name)
    original = effective_weight(layer)
    current = Layer(layer.name, layer.kind, dict(layer.params), dict(layer.attributes))
    kept: dict[str, int] = {}
    quantized: dict[str, QuantizedTensor] = {}
    rank = cp_params = None
    for action in actions:
        match action:
            case Tucker2Action():
                c_out, c_in, kernel, _ = current.params["weight"].shape
                current, rank, error = _tucker2(current, action)
                cp_params = cp_param_count(c_in, c_out, kernel, rank)
                logger.debug(f"tucker2 rank {rank}, error {error:.3e}")
            case TTMAction():
                current = _ttm(current, action)
            case PruneAction(sparsity=sparsity):
                for name in _weight_names(current):
                    pruned = prune_magnitude(current.params[name], sparsity)
                    current.params[name] = pruned.tensor
                    kept[name] = int(np.count_nonzero(pruned.mask))
            case QuantAction(bits=bits):
                for name in _weight_names(current):
                    quantized[name] = quantize_uniform(current.params[name], bits)
                    current.params[name] = dequantize(quantized[name])
    params_after = 0
    bytes_after = 0
    for name, param in current.params.items():
        count = kept.get(name, param.size)
        params_after += count
        bytes_after += (
            quantized[name].nbytes if name in quantized else count * _FLOAT_BYTES
        )
    rel_error = 0.0
    if actions and original is not None:
        norm = float(np.linalg.norm(original))
        if norm:
            rel_error = float(np.linalg.norm(original - effective_weight(current))) / norm
    report = LayerReport(
        layer.name,
        str(current.kind),
        layer.param_count,
        params_after,
        rel_error,
        [action.describe() for action in actions],
        layer.param_count * _FLOAT_BYTES,
        bytes_after,
        rank,
        cp_params,
    )
    if actions:
        logger.info(
            f"{layer.param_count} -> {params_after} parameters, "
            f"relative error {rel_error:.3e}"
        )
    return current, report


def _layer_actions(plan: Plan, layer: Layer) -> list[Action]:
    if layer.name in plan.layers:
        for action in plan.layers[layer.name]:
            if not compatible(action, layer):
                raise ActionTypeError(layer.name, action.op, str(layer.kind))
        return list(plan.layers[layer.name])
    return [action for action in plan.default if compatible(action, layer)]


def compress_model(
    model: ModelGraph, plan: Plan, workers: int = 1
) -> tuple[ModelGraph, CompressionReport]:
    """Compressed copy of the model and a report covering every parametric layer,
    compressed or not. Plan problems raise PlanError before any layer is touched."""
    names = set(model.names())
    for name in plan.layers:
        if name not in names:
            raise UnknownLayerError(name)
    jobs = [(layer, _layer_actions(plan, layer)) for layer in model.layers]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: compress_layer(*job), jobs))
    else:
        results = [compress_layer(*job) for job in jobs]
    compressed = ModelGraph(model.input_shape, [layer for layer, _ in results])
    report = CompressionReport(
        [report for layer, report in results if layer.kind in _PARAMETRIC]
    )
    _logger.info(
        f"{report.params_before} -> {report.params_after} parameters, "
        f"coefficient {report.coefficient:.3f}"
    )
    return compressed, report
