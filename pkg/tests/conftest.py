"""This module contains pytest fixtures."""


from pathlib import Path

import numpy as np
import pytest

from tt_automl.utils import AppPaths


@pytest.fixture(scope="session", name="resource_dir")
def resource_dir_fixture() -> Path:
    """Returns the path to the test resource directory.

    Returns:
        Path: The resource directory path.
    """
    return Path(__file__).parent.joinpath("resources")


@pytest.fixture(name="rng")
def rng_fixture() -> np.random.Generator:
    """Seeded numpy generator for random test inputs."""
    return np.random.default_rng(1234)


@pytest.fixture(name="app_paths", autouse=True)
def app_paths_fixture(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Keeps logs, settings and profiles of a test inside its tmp_path."""
    monkeypatch.setattr(AppPaths, "log", tmp_path / "app" / "tt_automl.log")
    monkeypatch.setattr(AppPaths, "settings", tmp_path / "app" / "settings.ini")
    monkeypatch.setattr(AppPaths, "profile", tmp_path / "app" / "tt_automl.prof")
