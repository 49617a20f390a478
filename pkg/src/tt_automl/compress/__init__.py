"""Tensor-network factorization, pruning, quantization and compression reports."""

import attrs


@attrs.define
class CompressionError(Exception):
    """Base class for invalid factorization, pruning and quantization arguments."""
