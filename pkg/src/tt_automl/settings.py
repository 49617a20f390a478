"""Persistent app settings.

To ensure consistent default values and avoid key collisions, the settings file should
never be read directly. Instead, new settings should be added to the SettingKey enum and
setters and getters should be added to this module. Command line flags override
whatever is returned here.
"""

from __future__ import annotations

import configparser
from enum import Enum
from typing import Any, TypeVar, assert_never

from tt_automl.constants import EXP_SHIFT_BETA, FULL_TENSOR_CAP, MAXVOL_DELTA
from tt_automl.logger import get_logger
from tt_automl.utils import AppPaths

_logger = get_logger(__file__)


class SettingKey(Enum):
    """Keys for storing and retrieving settings."""

    RANK = "optimizer/rank"
    SWEEPS = "optimizer/sweeps"
    DELTA = "optimizer/delta"
    TRANSFORM = "optimizer/transform"
    BETA = "optimizer/beta"
    PARALLELISM = "runner/parallelism"
    FULL_CAP = "tensor/full_cap"
    BATCH_SIZE = "training/batch_size"
    MOMENTUM = "training/momentum"
    LOG_LEVEL = "log/level"

    def section(self) -> str:
        return self.value.split("/", maxsplit=1)[0]

    def option(self) -> str:
        return self.value.split("/", maxsplit=1)[1]


class Direction(Enum):
    """Whether an objective is to be maximized or minimized."""

    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"

    def __str__(self) -> str:
        return self.value

    def sign(self) -> float:
        """Multiplier turning values into 'larger is better' scores."""
        match self:
            case Direction.MAXIMIZE:
                return 1.0
            case Direction.MINIMIZE:
                return -1.0
            case _ as unreachable:
                assert_never(unreachable)

    def worst(self) -> float:
        return -float("inf") if self is Direction.MAXIMIZE else float("inf")

    def is_better(self, value: float, than: float) -> bool:
        match self:
            case Direction.MAXIMIZE:
                return value > than
            case Direction.MINIMIZE:
                return value < than
            case _ as unreachable:
                assert_never(unreachable)


class Transform(Enum):
    """Value transform applied before index selection in the cross optimizer."""

    IDENTITY = "identity"
    EXP_SHIFT = "exp_shift"

    def __str__(self) -> str:  # pylint: disable=invalid-str-returned
        match self:
            case Transform.IDENTITY:
                return "identity"
            case Transform.EXP_SHIFT:
                return "exp_shift"
            case _ as unreachable:
                assert_never(unreachable)


class Algorithm(Enum):
    """Optimizers the harness can run."""

    TETRAOPT = "tetraopt"
    RANDOM = "random"
    TPE = "tpe"

    def __str__(self) -> str:
        return self.value


def _read() -> configparser.ConfigParser:
    config = configparser.ConfigParser()
    if AppPaths.settings.exists():
        try:
            config.read(AppPaths.settings, encoding="utf-8")
        except configparser.Error as exception:
            _logger.warning(f"Ignoring unreadable settings file: {exception}")
            return configparser.ConfigParser()
    return config


T = TypeVar("T")


def get_setting(key: SettingKey, default: T) -> T:
    config = _read()
    if not config.has_option(key.section(), key.option()):
        return default
    raw = config.get(key.section(), key.option())
    try:
        if isinstance(default, bool):
            return config.getboolean(key.section(), key.option())  # type: ignore
        # enums are constructed from their value, numbers from their text
        return type(default)(raw)  # type: ignore[call-arg]
    except ValueError:
        _logger.warning(f"Invalid value '{raw}' for setting '{key.value}'.")
        return default


def set_setting(key: SettingKey, value: Any) -> None:
    config = _read()
    if not config.has_section(key.section()):
        config.add_section(key.section())
    config.set(key.section(), key.option(), str(value))
    AppPaths.settings.parent.mkdir(parents=True, exist_ok=True)
    with AppPaths.settings.open("w", encoding="utf-8") as file:
        config.write(file)


def get_rank() -> int:
    return get_setting(SettingKey.RANK, 4)


def set_rank(value: int) -> None:
    set_setting(SettingKey.RANK, value)


def get_sweeps() -> int:
    return get_setting(SettingKey.SWEEPS, 4)


def get_delta() -> float:
    return get_setting(SettingKey.DELTA, MAXVOL_DELTA)


def get_transform() -> Transform:
    return get_setting(SettingKey.TRANSFORM, Transform.IDENTITY)


def set_transform(value: Transform) -> None:
    set_setting(SettingKey.TRANSFORM, value.value)


def get_beta() -> float:
    return get_setting(SettingKey.BETA, EXP_SHIFT_BETA)


def get_parallelism() -> int:
    return get_setting(SettingKey.PARALLELISM, 1)


def set_parallelism(value: int) -> None:
    set_setting(SettingKey.PARALLELISM, value)


def get_full_cap() -> int:
    return get_setting(SettingKey.FULL_CAP, FULL_TENSOR_CAP)


def get_batch_size() -> int:
    return get_setting(SettingKey.BATCH_SIZE, 32)


def get_momentum() -> float:
    return get_setting(SettingKey.MOMENTUM, 0.9)


def get_log_level() -> str:
    return get_setting(SettingKey.LOG_LEVEL, "INFO")
