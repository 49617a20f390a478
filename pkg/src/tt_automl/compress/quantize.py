"""Asymmetric affine quantization to 4 or 8 bit codes."""

from __future__ import annotations

import math

import attrs
import numpy as np

from tt_automl.compress import CompressionError
from tt_automl.linalg import NonFiniteError

SUPPORTED_BITS = (4, 8)
# scale, zero point and offset, each stored in 4 bytes
_SIDE_BYTES = 12


@attrs.define
class BitWidthError(CompressionError):
    bits: int

    def __str__(self) -> str:
        return f"unsupported bit width {self.bits}, use one of {SUPPORTED_BITS}"


@attrs.frozen
class QuantizedTensor:
    """w ~ (code - zero_point) * scale + offset. offset is 0 except for constant
    tensors, which it then reproduces exactly."""

    codes: np.ndarray
    scale: float
    zero_point: int
    bits: int
    offset: float = 0.0

    @property
    def shape(self) -> tuple[int, ...]:
        return self.codes.shape

    @property
    def nbytes(self) -> int:
        return math.ceil(self.codes.size * self.bits / 8) + _SIDE_BYTES


def quantize_uniform(tensor: np.ndarray, bits: int = 8) -> QuantizedTensor:
    """scale = (max - min) / (2^b - 1), zero_point = round(-min / scale), codes clamped
    to [0, 2^b - 1]."""
    if bits not in SUPPORTED_BITS:
        raise BitWidthError(bits)
    values = np.asarray(tensor, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("quantized tensor")
    levels = 2**bits - 1
    low, high = (float(values.min()), float(values.max())) if values.size else (0, 0)
    if high == low:
        codes = np.zeros(values.shape, dtype=np.uint8)
        return QuantizedTensor(codes, 1.0, 0, bits, offset=low)
    scale = (high - low) / levels
    zero_point = int(np.round(-low / scale))
    codes = np.clip(np.round(values / scale) + zero_point, 0, levels).astype(np.uint8)
    return QuantizedTensor(codes, scale, zero_point, bits)


def dequantize(quantized: QuantizedTensor) -> np.ndarray:
    return (
        quantized.codes.astype(np.float64) - quantized.zero_point
    ) * quantized.scale + quantized.offset
