"""Tests for the sequential model graph."""

import numpy as np
import pytest

from tt_automl.container import ContainerError, container_read, container_write
from tt_automl.nn.data import gen_bars
from tt_automl.nn.model import (
    Layer,
    LayerKind,
    ModelFormatError,
    ModelGraph,
    ModelShapeError,
    bars_cnn,
    linear_classifier,
    mlp,
    model_from_container,
)
from tt_automl.nn.train import forward


def test_bars_cnn_shapes() -> None:
    model = bars_cnn()
    assert model.param_count == 2514
    assert model.validate()[0] == (16, 8, 8)
    assert model.output_shape == (2,)
    assert model.class_count == 2


@pytest.mark.parametrize(
    "model", [mlp((1, 8, 8), 5, 2, seed=1), linear_classifier((1, 8, 8), 2, seed=1)]
)
def test_dense_models_take_images(model: ModelGraph) -> None:
    assert model.input_shape == (1, 8, 8)
    assert model.layers[1].params["weight"].shape[0] == 64
    assert forward(model, gen_bars(4).images).shape == (4, 2)


def test_init_is_seeded() -> None:
    first, second, other = bars_cnn(seed=3), bars_cnn(seed=3), bars_cnn(seed=4)
    weight = first.layer("conv1").params["weight"]
    assert np.array_equal(weight, second.layer("conv1").params["weight"])
    assert not np.array_equal(weight, other.layer("conv1").params["weight"])


def test_shape_error_names_layer() -> None:
    model = mlp(4, 3, 2)
    with pytest.raises(ModelShapeError) as excinfo:
        ModelGraph((5, 1, 1), model.layers)
    assert excinfo.value.layer == "fc1"


def test_duplicate_names() -> None:
    with pytest.raises(ModelShapeError):
        ModelGraph(
            (2, 1, 1),
            [Layer("x", LayerKind.FLATTEN), Layer("x", LayerKind.RELU)],
        )


def test_pool_too_large() -> None:
    with pytest.raises(ModelShapeError):
        ModelGraph((1, 1, 1), [Layer("pool", LayerKind.MAXPOOL2D, attributes={"size": 2})])


def test_forward_rejects_wrong_input(rng: np.random.Generator) -> None:
    with pytest.raises(ModelShapeError):
        forward(bars_cnn(), rng.standard_normal((2, 1, 6, 6)))


def test_container_round_trip(rng: np.random.Generator) -> None:
    model = bars_cnn(channels=4)
    loaded = model_from_container(container_read(container_write(*model.to_container())))
    assert loaded.names() == model.names()
    assert loaded.input_shape == model.input_shape
    for original, restored in zip(model.layers, loaded.layers):
        assert original.kind is restored.kind
        assert original.attributes == restored.attributes
        for name, param in original.params.items():
            assert np.array_equal(restored.params[name], param.astype(np.float32))
    batch = rng.standard_normal((2, 1, 8, 8))
    assert np.allclose(forward(loaded, batch), forward(model, batch), atol=1e-4)


def test_container_without_manifest() -> None:
    with pytest.raises(ModelFormatError):
        model_from_container(container_read(container_write({})))


def test_container_missing_parameter() -> None:
    entries, meta = mlp(2, 2, 2).to_container()
    del entries["fc2.bias"]
    with pytest.raises(ContainerError):
        model_from_container(container_read(container_write(entries, meta)))


def test_copy_is_deep() -> None:
    model = mlp(2, 2, 2)
    clone = model.copy()
    clone.layer("fc1").params["weight"][0, 0] = 42.0
    assert model.layer("fc1").params["weight"][0, 0] != 42.0
