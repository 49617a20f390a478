"""Inference, softmax cross-entropy backpropagation and SGD with momentum."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Iterator

import attrs
import numpy as np

from tt_automl.logger import get_logger
from tt_automl.nn.data import Dataset
from tt_automl.nn.layers import Grads, backward_layer, forward_layer
from tt_automl.nn.model import LayerKind, ModelGraph, ModelShapeError
from tt_automl.rng import Rng
from tt_automl.settings import get_batch_size, get_momentum

_logger = get_logger(__file__)

_EVAL_BATCH = 256


@attrs.define
class TrainingError(Exception):
    """Training diverged."""

    epoch: int
    step: int
    loss: float

    def __str__(self) -> str:
        return f"non-finite loss {self.loss} at epoch {self.epoch}, step {self.step}"


@attrs.define
class ClassCountError(Exception):
    """Model outputs and dataset classes disagree."""

    outputs: int
    classes: int

    def __str__(self) -> str:
        return f"model has {self.outputs} outputs but the data has {self.classes} classes"


@attrs.frozen
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


@attrs.define
class History:
    epochs: list[EpochStats] = attrs.field(factory=list)

    def losses(self) -> list[float]:
        return [stats.loss for stats in self.epochs]

    def csv_rows(self) -> Iterator[tuple[int, float, float]]:
        for stats in self.epochs:
            yield stats.epoch, stats.loss, stats.accuracy


def _check_input(model: ModelGraph, batch: np.ndarray) -> np.ndarray:
    if batch.shape[1:] != model.input_shape:
        raise ModelShapeError(
            "input", f"batch shape {batch.shape[1:]} vs model input {model.input_shape}"
        )
    return np.asarray(batch, dtype=np.float64)


def forward(model: ModelGraph, batch: np.ndarray) -> np.ndarray:
    """Logits (or probabilities after a softmax layer) of shape (B, classes)."""
    x = _check_input(model, batch)
    for layer in model.layers:
        x, _ = forward_layer(layer, x)
    return x


def predict(model: ModelGraph, batch: np.ndarray) -> np.ndarray:
    """Class indices; ties resolve to the lowest class."""
    return np.argmax(forward(model, batch), axis=1)


def accuracy(model: ModelGraph, data: Dataset, workers: int = 1) -> float:
    """Fraction of correct predictions. Batches may be sharded over `workers` threads;
    results are merged by batch position."""
    if model.class_count != data.class_count:
        raise ClassCountError(model.class_count, data.class_count)
    starts = range(0, len(data), _EVAL_BATCH)

    def correct(start: int) -> int:
        stop = start + _EVAL_BATCH
        return int(np.sum(predict(model, data.images[start:stop]) == data.labels[start:stop]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(correct, starts))
    else:
        counts = [correct(start) for start in starts]
    return sum(counts) / len(data)


def _training_layers(model: ModelGraph) -> list:
    """A trailing softmax is folded into the loss."""
    layers = list(model.layers)
    if layers and layers[-1].kind is LayerKind.SOFTMAX:
        layers.pop()
    return layers


def loss_and_gradients(
    model: ModelGraph, images: np.ndarray, labels: np.ndarray
) -> tuple[float, dict[str, Grads]]:
    """Mean softmax cross-entropy of the batch and gradients per layer name."""
    x = _check_input(model, images)
    layers = _training_layers(model)
    caches: list[Any] = []
    for layer in layers:
        x, cache = forward_layer(layer, x)
        caches.append(cache)
    shifted = x - x.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    batch = len(labels)
    loss = -float(log_probs[np.arange(batch), labels].mean())
    dout = np.exp(log_probs)
    dout[np.arange(batch), labels] -= 1.0
    dout /= batch
    grads: dict[str, Grads] = {}
    for layer, cache in zip(reversed(layers), reversed(caches)):
        dout, layer_grads = backward_layer(layer, dout, cache)
        if layer_grads:
            grads[layer.name] = layer_grads
    return loss, grads


def train(
    model: ModelGraph,
    data: Dataset,
    epochs: int,
    lr: float,
    momentum: float | None = None,
    batch: int | None = None,
    seed: int = 0,
) -> tuple[ModelGraph, History]:
    """Trains a copy of the model; the input model is left untouched.

    Mini-batches follow a seeded Fisher-Yates shuffle per epoch, so runs are
    reproducible. A non-finite loss aborts with TrainingError.
    """
    momentum = get_momentum() if momentum is None else momentum
    batch = get_batch_size() if batch is None else batch
    if model.class_count != data.class_count:
        raise ClassCountError(model.class_count, data.class_count)
    model = model.copy()
    rng = Rng(seed)
    velocity: dict[tuple[str, str], np.ndarray] = {}
    history = History()
    order = list(range(len(data)))
    for epoch in range(1, epochs + 1):
        rng.shuffle(order)
        losses = []
        for step, start in enumerate(range(0, len(order), batch), start=1):
            chosen = order[start : start + batch]
            loss, grads = loss_and_gradients(
                model, data.images[chosen], data.labels[chosen]
            )
            if not math.isfinite(loss):
                raise TrainingError(epoch, step, loss)
            losses.append(loss)
            for name, layer_grads in grads.items():
                params = model.layer(name).params
                for param, grad in layer_grads.items():
                    key = (name, param)
                    update = momentum * velocity.get(key, 0.0) - lr * grad
                    velocity[key] = update
                    params[param] = params[param] + update
        stats = EpochStats(epoch, float(np.mean(losses)), accuracy(model, data))
        history.epochs.append(stats)
        _logger.info(
            f"epoch {epoch}: loss {stats.loss:.4f}, accuracy {stats.accuracy:.3f}"
        )
    return model, history
