"""Labelled image datasets and the synthetic generators used for desk-scale runs."""

from __future__ import annotations

from typing import Any

import attrs
import numpy as np

from tt_automl.container import ContainerData, DType
from tt_automl.rng import Rng


@attrs.define
class DatasetError(Exception):
    """Invalid dataset contents or arguments."""

    detail: str

    def __str__(self) -> str:
        return f"invalid dataset: {self.detail}"


@attrs.define
class Dataset:
    """images f32 [N, C, H, W], labels int64 [N] in [0, class_count)."""

    images: np.ndarray = attrs.field(converter=lambda a: np.asarray(a, dtype=np.float32))
    labels: np.ndarray = attrs.field(converter=lambda a: np.asarray(a, dtype=np.int64))
    class_count: int

    def __attrs_post_init__(self) -> None:
        if self.images.ndim != 4 or len(self.images) < 1:
            raise DatasetError(f"images must be [N, C, H, W], got {self.images.shape}")
        if self.labels.shape != (len(self.images),):
            raise DatasetError(
                f"{self.labels.shape} labels for {len(self.images)} images"
            )
        if self.labels.min() < 0 or self.labels.max() >= self.class_count:
            raise DatasetError(f"labels outside [0, {self.class_count})")

    def __len__(self) -> int:
        return len(self.labels)

    def to_container(self) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
        return (
            {
                "images": self.images.astype(DType.F32.numpy),
                "labels": self.labels.astype(DType.I64.numpy),
            },
            {"dataset": {"class_count": self.class_count}},
        )


def dataset_from_container(data: ContainerData) -> Dataset:
    meta = data.meta.get("dataset")
    if not isinstance(meta, dict) or not isinstance(meta.get("class_count"), int):
        raise DatasetError("no 'dataset.class_count' in metadata")
    return Dataset(data.require("images"), data.require("labels"), meta["class_count"])


def gen_bars(n: int, size: int = 8, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Even indices get a horizontal bar at a random row (class 0), odd ones a vertical
    bar at a random column (class 1), plus Gaussian pixel noise."""
    if n < 2 or n % 2:
        raise DatasetError(f"need an even n >= 2, got {n}")
    rng = Rng(seed)
    images = np.zeros((n, 1, size, size))
    labels = np.arange(n) % 2
    for i in range(n):
        position = rng.integer(size)
        if labels[i] == 0:
            images[i, 0, position, :] = 1.0
        else:
            images[i, 0, :, position] = 1.0
        if noise > 0:
            images[i, 0] += noise * np.array(rng.normals(size * size)).reshape(size, size)
    return Dataset(images, labels, 2)


def gen_blobs(
    n: int, features: int = 2, separation: float = 4.0, seed: int = 0
) -> Dataset:
    """Two unit-variance Gaussian clouds centred at -/+ separation/2 on every feature,
    shaped (features, 1, 1) per sample."""
    if n < 2 or n % 2:
        raise DatasetError(f"need an even n >= 2, got {n}")
    rng = Rng(seed)
    labels = np.arange(n) % 2
    centres = (labels[:, None] - 0.5) * separation
    points = centres + np.array(rng.normals(n * features)).reshape(n, features)
    return Dataset(points.reshape(n, features, 1, 1), labels, 2)
