"""Sequential model graph: named layers with parameter tensors, shape checking,
serialization and a small model zoo."""

from __future__ import annotations

import copy
import math
from enum import Enum
from typing import Any, Iterator, Sequence

import attrs
import numpy as np

from tt_automl.container import ContainerData, DType
from tt_automl.rng import Rng


@attrs.define
class ModelError(Exception):
    """Root of model errors."""


@attrs.define
class ModelShapeError(ModelError):
    """The shape chain breaks at a layer."""

    layer: str
    detail: str

    def __str__(self) -> str:
        return f"layer '{self.layer}': {self.detail}"


@attrs.define
class ModelFormatError(ModelError):
    """Invalid model manifest or missing parameters."""

    detail: str

    def __str__(self) -> str:
        return f"invalid model: {self.detail}"


class LayerKind(Enum):
    """Layer types of the sequential graph."""

    CONV2D = "conv2d"
    DENSE = "dense"
    RELU = "relu"
    MAXPOOL2D = "maxpool2d"
    FLATTEN = "flatten"
    SOFTMAX = "softmax"
    CONV2D_TUCKER2 = "conv2d_tucker2"
    DENSE_TTM = "dense_ttm"

    def __str__(self) -> str:
        return self.value


@attrs.define
class Layer:
    """Parameters are float64 arrays; attributes hold stride, padding, pool size and
    TT-matrix factors."""

    name: str
    kind: LayerKind
    params: dict[str, np.ndarray] = attrs.field(factory=dict)
    attributes: dict[str, Any] = attrs.field(factory=dict)

    @property
    def param_count(self) -> int:
        return sum(int(param.size) for param in self.params.values())

    @property
    def stride(self) -> int:
        return int(self.attributes.get("stride", 1))

    @property
    def padding(self) -> int:
        return int(self.attributes.get("padding", 0))

    @property
    def pool(self) -> int:
        return int(self.attributes.get("size", 2))

    def ttm_cores(self) -> list[np.ndarray]:
        return [self.params[f"core{k}"] for k in range(int(self.attributes["cores"]))]


def _conv_out(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def _conv_shape(
    layer: Layer, shape: tuple[int, ...], c_in: int, c_out: int, kernel: int
) -> tuple[int, ...]:
    if len(shape) != 3 or shape[0] != c_in:
        raise ModelShapeError(layer.name, f"expects ({c_in}, H, W) input, got {shape}")
    height = _conv_out(shape[1], kernel, layer.stride, layer.padding)
    width = _conv_out(shape[2], kernel, layer.stride, layer.padding)
    if height < 1 or width < 1:
        raise ModelShapeError(layer.name, f"kernel {kernel} too large for {shape}")
    return (c_out, height, width)


def _dense_shape(layer: Layer, shape: tuple[int, ...], n_in: int, n_out: int) -> tuple[int, ...]:
    if shape != (n_in,):
        raise ModelShapeError(layer.name, f"expects ({n_in},) input, got {shape}")
    return (n_out,)


def output_shape(layer: Layer, shape: tuple[int, ...]) -> tuple[int, ...]:
    """Per-sample output shape of the layer, or ModelShapeError naming it."""
    try:
        match layer.kind:
            case LayerKind.CONV2D:
                c_out, c_in, kernel, _ = layer.params["weight"].shape
                return _conv_shape(layer, shape, c_in, c_out, kernel)
            case LayerKind.CONV2D_TUCKER2:
                c_in = layer.params["u_in"].shape[0]
                c_out = layer.params["u_out"].shape[0]
                kernel = layer.params["core"].shape[2]
                return _conv_shape(layer, shape, c_in, c_out, kernel)
            case LayerKind.DENSE:
                n_in, n_out = layer.params["weight"].shape
                return _dense_shape(layer, shape, n_in, n_out)
            case LayerKind.DENSE_TTM:
                cores = layer.ttm_cores()
                n_in = math.prod(core.shape[1] for core in cores)
                n_out = math.prod(core.shape[2] for core in cores)
                return _dense_shape(layer, shape, n_in, n_out)
            case LayerKind.MAXPOOL2D:
                if len(shape) != 3 or shape[1] < layer.pool or shape[2] < layer.pool:
                    raise ModelShapeError(layer.name, f"cannot pool {shape}")
                return (shape[0], shape[1] // layer.pool, shape[2] // layer.pool)
            case LayerKind.FLATTEN:
                return (math.prod(shape),)
            case LayerKind.RELU | LayerKind.SOFTMAX:
                return shape
    except KeyError as exception:
        raise ModelShapeError(layer.name, f"missing parameter {exception}") from exception
    raise ModelShapeError(layer.name, f"unknown kind {layer.kind}")


@attrs.define
class ModelGraph:
    """Layers applied in order to inputs of `input_shape` (C, H, W)."""

    input_shape: tuple[int, ...] = attrs.field(converter=tuple)
    layers: list[Layer] = attrs.field(factory=list)

    def __attrs_post_init__(self) -> None:
        self.validate()

    def __iter__(self) -> Iterator[Layer]:
        return iter(self.layers)

    def validate(self) -> list[tuple[int, ...]]:
        """Shapes after every layer; checks name uniqueness and the shape chain."""
        names: set[str] = set()
        shapes = []
        shape = self.input_shape
        for layer in self.layers:
            if layer.name in names:
                raise ModelShapeError(layer.name, "duplicate layer name")
            names.add(layer.name)
            shape = output_shape(layer, shape)
            shapes.append(shape)
        return shapes

    @property
    def output_shape(self) -> tuple[int, ...]:
        shapes = self.validate()
        return shapes[-1] if shapes else self.input_shape

    @property
    def class_count(self) -> int:
        return math.prod(self.output_shape)

    @property
    def param_count(self) -> int:
        return sum(layer.param_count for layer in self.layers)

    def layer(self, name: str) -> Layer:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    def names(self) -> list[str]:
        return [layer.name for layer in self.layers]

    def copy(self) -> ModelGraph:
        return copy.deepcopy(self)

    def to_container(self) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
        entries = {
            f"{layer.name}.{name}": param.astype(DType.F32.numpy)
            for layer in self.layers
            for name, param in layer.params.items()
        }
        manifest = {
            "input_shape": list(self.input_shape),
            "layers": [
                {
                    "name": layer.name,
                    "kind": str(layer.kind),
                    "attributes": layer.attributes,
                    "params": list(layer.params),
                }
                for layer in self.layers
            ],
        }
        return entries, {"model": manifest}


def model_from_container(data: ContainerData) -> ModelGraph:
    manifest = data.meta.get("model")
    if not isinstance(manifest, dict):
        raise ModelFormatError("no 'model' manifest in metadata")
    try:
        layers = [
            Layer(
                spec["name"],
                LayerKind(spec["kind"]),
                {
                    name: data.require(f"{spec['name']}.{name}").astype(np.float64)
                    for name in spec["params"]
                },
                dict(spec.get("attributes", {})),
            )
            for spec in manifest["layers"]
        ]
        input_shape = tuple(int(dim) for dim in manifest["input_shape"])
    except (KeyError, TypeError, ValueError) as exception:
        raise ModelFormatError(repr(exception)) from exception
    return ModelGraph(input_shape, layers)


def _he(rng: Rng, shape: Sequence[int], fan_in: int) -> np.ndarray:
    scale = math.sqrt(2.0 / fan_in)
    return scale * np.array(rng.normals(math.prod(shape))).reshape(shape)


def conv_layer(
    name: str,
    c_in: int,
    c_out: int,
    kernel: int,
    rng: Rng,
    stride: int = 1,
    padding: int = 0,
) -> Layer:
    """Conv layer with He-initialized weights and zero bias."""
    return Layer(
        name,
        LayerKind.CONV2D,
        {
            "weight": _he(rng, (c_out, c_in, kernel, kernel), c_in * kernel * kernel),
            "bias": np.zeros(c_out),
        },
        {"stride": stride, "padding": padding},
    )


def dense_layer(name: str, n_in: int, n_out: int, rng: Rng) -> Layer:
    return Layer(
        name,
        LayerKind.DENSE,
        {"weight": _he(rng, (n_in, n_out), n_in), "bias": np.zeros(n_out)},
    )


def bars_cnn(
    size: int = 8,
    channels: int = 16,
    classes: int = 2,
    in_channels: int = 1,
    seed: int = 0,
) -> ModelGraph:
    """conv -> relu -> pool -> conv -> relu -> pool -> pool -> flatten -> dense.

    3x3 convs with padding 1 keep the spatial size; three 2x2 pools reduce an 8x8
    input to a single position.
    """
    rng = Rng(seed)
    spatial = size // 8
    return ModelGraph(
        (in_channels, size, size),
        [
            conv_layer("conv1", in_channels, channels, 3, rng, padding=1),
            Layer("relu1", LayerKind.RELU),
            Layer("pool1", LayerKind.MAXPOOL2D, attributes={"size": 2}),
            conv_layer("conv2", channels, channels, 3, rng, padding=1),
            Layer("relu2", LayerKind.RELU),
            Layer("pool2", LayerKind.MAXPOOL2D, attributes={"size": 2}),
            Layer("pool3", LayerKind.MAXPOOL2D, attributes={"size": 2}),
            Layer("flatten", LayerKind.FLATTEN),
            dense_layer("fc", channels * spatial * spatial, classes, rng),
        ],
    )


def _flat_input(inputs: int | Sequence[int]) -> tuple[tuple[int, int, int], int]:
    """Input shape (C, H, W) and its flattened size; a bare int n means (n, 1, 1)."""
    if isinstance(inputs, int):
        return (inputs, 1, 1), inputs
    c, h, w = (int(n) for n in inputs)
    return (c, h, w), c * h * w


def mlp(
    inputs: int | Sequence[int], hidden: int, classes: int, seed: int = 0
) -> ModelGraph:
    """flatten -> dense -> relu -> dense. `inputs` is the (C, H, W) sample shape or a
    feature count."""
    input_shape, n_in = _flat_input(inputs)
    rng = Rng(seed)
    return ModelGraph(
        input_shape,
        [
            Layer("flatten", LayerKind.FLATTEN),
            dense_layer("fc1", n_in, hidden, rng),
            Layer("relu1", LayerKind.RELU),
            dense_layer("fc2", hidden, classes, rng),
        ],
    )


def linear_classifier(
    inputs: int | Sequence[int], classes: int, seed: int = 0
) -> ModelGraph:
    input_shape, n_in = _flat_input(inputs)
    rng = Rng(seed)
    return ModelGraph(
        input_shape,
        [Layer("flatten", LayerKind.FLATTEN), dense_layer("fc", n_in, classes, rng)],
    )
