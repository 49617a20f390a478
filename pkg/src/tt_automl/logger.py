"""Helpers for logging.

Logging levels:
    CRITICAL:   The app is forced to shut down or will stop working as intended.
    ERROR:      A problem occured comprimising the outcome of an operation.
    WARNING:    A problem occured, but the app has a way to recover.
    INFO:       Something happened that is of interest to the user.
    DEBUG:      Something happened that might be relevant for diagnosis or debugging.
"""

import logging
from typing import Any


class RunLogger(logging.LoggerAdapter):
    """Logger wrapper that takes care of logging the run tag, e.g. 'tpe#3' or a
    layer name."""

    def __init__(self, tag: str, logger: Any, extra: Any = ...) -> None:
        super().__init__(logger, extra)
        self.tag = tag

    def process(self, msg: str, kwargs: Any) -> Any:
        return f"[{self.tag}] {msg}", kwargs


Log = logging.Logger | RunLogger


def get_logger(file: str, tag: str | None = None) -> Log:
    logger = logging.getLogger(file)
    if tag:
        return RunLogger(tag, logger)
    return logger
