"""Forward and backward passes of every layer kind on NCHW batches.

Each forward returns the output and a cache consumed by the matching backward, which
returns the input gradient and the parameter gradients by name.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tt_automl.compress.ttm import TTMatrix
from tt_automl.nn.model import Layer, LayerKind, ModelShapeError

Grads = dict[str, np.ndarray]


def _windows(x: np.ndarray, kernel: int, stride: int, padding: int) -> np.ndarray:
    """(B, C, H', W', D, D) view of all receptive fields."""
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    return sliding_window_view(x, (kernel, kernel), axis=(2, 3))[
        :, :, ::stride, ::stride
    ]


def conv2d_forward(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray | None,
    stride: int = 1,
    padding: int = 0,
) -> tuple[np.ndarray, tuple]:
    """Cross-correlation of x (B, C_in, H, W) with weight (C_out, C_in, D, D)."""
    windows = _windows(x, weight.shape[2], stride, padding)
    out = np.tensordot(windows, weight, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias[None, :, None, None]
    return out, (x.shape, windows, weight, stride, padding)


def conv2d_backward(dout: np.ndarray, cache: tuple) -> tuple[np.ndarray, Grads]:
    shape, windows, weight, stride, padding = cache
    kernel = weight.shape[2]
    out_h, out_w = dout.shape[2], dout.shape[3]
    grads = {
        "weight": np.tensordot(dout, windows, axes=([0, 2, 3], [0, 2, 3])),
        "bias": dout.sum(axis=(0, 2, 3)),
    }
    # (B, H', W', C_in, D, D)
    dwindows = np.tensordot(dout, weight, axes=([1], [0]))
    batch, channels, height, width = shape
    dpadded = np.zeros((batch, channels, height + 2 * padding, width + 2 * padding))
    for i in range(kernel):
        for j in range(kernel):
            dpadded[
                :,
                :,
                i : i + stride * (out_h - 1) + 1 : stride,
                j : j + stride * (out_w - 1) + 1 : stride,
            ] += dwindows[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    dx = dpadded[:, :, padding : padding + height, padding : padding + width]
    return dx, grads


def maxpool_forward(x: np.ndarray, size: int) -> tuple[np.ndarray, tuple]:
    """Non-overlapping size x size max pooling; ragged borders are dropped."""
    batch, channels, height, width = x.shape
    out_h, out_w = height // size, width // size
    blocks = (
        x[:, :, : out_h * size, : out_w * size]
        .reshape(batch, channels, out_h, size, out_w, size)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, out_h, out_w, size * size)
    )
    # argmax routes the gradient to the first maximal element
    winners = np.argmax(blocks, axis=-1)
    out = np.take_along_axis(blocks, winners[..., None], axis=-1)[..., 0]
    return out, (x.shape, winners, size)


def maxpool_backward(dout: np.ndarray, cache: tuple) -> tuple[np.ndarray, Grads]:
    shape, winners, size = cache
    batch, channels, height, width = shape
    out_h, out_w = winners.shape[2], winners.shape[3]
    blocks = np.zeros((batch, channels, out_h, out_w, size * size))
    np.put_along_axis(blocks, winners[..., None], dout[..., None], axis=-1)
    dx = np.zeros(shape)
    dx[:, :, : out_h * size, : out_w * size] = (
        blocks.reshape(batch, channels, out_h, out_w, size, size)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, out_h * size, out_w * size)
    )
    return dx, {}


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _tucker2_weights(layer: Layer) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    u_in, core, u_out = layer.params["u_in"], layer.params["core"], layer.params["u_out"]
    return u_in.T[:, :, None, None], core, u_out[:, :, None, None]


def forward_layer(layer: Layer, x: np.ndarray) -> tuple[np.ndarray, Any]:
    match layer.kind:
        case LayerKind.CONV2D:
            return conv2d_forward(
                x,
                layer.params["weight"],
                layer.params["bias"],
                layer.stride,
                layer.padding,
            )
        case LayerKind.CONV2D_TUCKER2:
            first, core, last = _tucker2_weights(layer)
            z1, cache1 = conv2d_forward(x, first, None)
            z2, cache2 = conv2d_forward(z1, core, None, layer.stride, layer.padding)
            out, cache3 = conv2d_forward(z2, last, layer.params["bias"])
            return out, (cache1, cache2, cache3)
        case LayerKind.DENSE:
            return x @ layer.params["weight"] + layer.params["bias"], x
        case LayerKind.DENSE_TTM:
            ttm = TTMatrix(layer.ttm_cores())
            return ttm.matvec(x) + layer.params["bias"], ttm
        case LayerKind.RELU:
            mask = x > 0
            return x * mask, mask
        case LayerKind.MAXPOOL2D:
            return maxpool_forward(x, layer.pool)
        case LayerKind.FLATTEN:
            return x.reshape(x.shape[0], -1), x.shape
        case LayerKind.SOFTMAX:
            probabilities = softmax(x)
            return probabilities, probabilities
    raise ModelShapeError(layer.name, f"unknown kind {layer.kind}")


def backward_layer(layer: Layer, dout: np.ndarray, cache: Any) -> tuple[np.ndarray, Grads]:
    """Input gradient and parameter gradients. dense_ttm cores are frozen and get no
    gradient; their bias does."""
    match layer.kind:
        case LayerKind.CONV2D:
            return conv2d_backward(dout, cache)
        case LayerKind.CONV2D_TUCKER2:
            cache1, cache2, cache3 = cache
            dz2, grads3 = conv2d_backward(dout, cache3)
            dz1, grads2 = conv2d_backward(dz2, cache2)
            dx, grads1 = conv2d_backward(dz1, cache1)
            return dx, {
                "u_in": grads1["weight"][:, :, 0, 0].T,
                "core": grads2["weight"],
                "u_out": grads3["weight"][:, :, 0, 0],
                "bias": grads3["bias"],
            }
        case LayerKind.DENSE:
            return dout @ layer.params["weight"].T, {
                "weight": cache.T @ dout,
                "bias": dout.sum(axis=0),
            }
        case LayerKind.DENSE_TTM:
            return cache.transpose().matvec(dout), {"bias": dout.sum(axis=0)}
        case LayerKind.RELU:
            return dout * cache, {}
        case LayerKind.MAXPOOL2D:
            return maxpool_backward(dout, cache)
        case LayerKind.FLATTEN:
            return dout.reshape(cache), {}
        case LayerKind.SOFTMAX:
            inner = np.sum(dout * cache, axis=1, keepdims=True)
            return cache * (dout - inner), {}
    raise ModelShapeError(layer.name, f"unknown kind {layer.kind}")
