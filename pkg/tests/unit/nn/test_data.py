"""Tests for datasets and generators."""

import numpy as np
import pytest

from tt_automl.container import container_read, container_write
from tt_automl.nn.data import (
    Dataset,
    DatasetError,
    dataset_from_container,
    gen_bars,
    gen_blobs,
)


def test_noise_free_bars() -> None:
    data = gen_bars(20, size=8, noise=0.0, seed=1)
    assert data.images.shape == (20, 1, 8, 8)
    assert data.labels.tolist() == [0, 1] * 10
    for image, label in zip(data.images, data.labels):
        assert np.count_nonzero(image == 1.0) == 8
        lines = image[0].sum(axis=1 - label)
        assert sorted(lines.tolist()) == [0.0] * 7 + [8.0]


def test_bars_are_seeded() -> None:
    assert gen_bars(10, seed=2).images.tobytes() == gen_bars(10, seed=2).images.tobytes()
    assert gen_bars(10, seed=2).images.tobytes() != gen_bars(10, seed=3).images.tobytes()


@pytest.mark.parametrize("n", [0, 3])
def test_bars_need_even_count(n: int) -> None:
    with pytest.raises(DatasetError):
        gen_bars(n)


def test_blobs_shape() -> None:
    data = gen_blobs(10, features=3)
    assert data.images.shape == (10, 3, 1, 1)
    assert data.class_count == 2


def test_label_range() -> None:
    with pytest.raises(DatasetError):
        Dataset(np.zeros((2, 1, 2, 2)), [0, 2], 2)
    with pytest.raises(DatasetError):
        Dataset(np.zeros((2, 2, 2)), [0, 1], 2)
    with pytest.raises(DatasetError):
        Dataset(np.zeros((2, 1, 2, 2)), [0], 2)


def test_container_round_trip() -> None:
    data = gen_bars(6, seed=4)
    loaded = dataset_from_container(container_read(container_write(*data.to_container())))
    assert np.array_equal(loaded.images, data.images)
    assert np.array_equal(loaded.labels, data.labels)
    assert loaded.class_count == 2


def test_container_without_class_count() -> None:
    entries, _ = gen_bars(2).to_container()
    with pytest.raises(DatasetError):
        dataset_from_container(container_read(container_write(entries, {})))
