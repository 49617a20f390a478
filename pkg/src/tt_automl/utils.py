"""General-purpose utilities."""

import csv
import sys
from pathlib import Path
from typing import Iterable, Sequence

from appdirs import AppDirs

_app_dirs = AppDirs("tt_automl", "tt_automl")


def _root() -> Path:
    """Returns source root folder or temprory bundle folder if running as such.

    https://pyinstaller.org/en/stable/runtime-information.html#run-time-information
    """
    if getattr(sys, "frozen", False) and (bundle := getattr(sys, "_MEIPASS", None)):
        return Path(bundle)
    return Path(__file__).parent.parent.parent.absolute()


class AppPaths:
    """App data paths."""

    log = Path(_app_dirs.user_log_dir, "tt_automl.log")
    settings = Path(_app_dirs.user_config_dir, "settings.ini")
    root = _root()
    profile = Path(root, "tt_automl.prof")

    @classmethod
    def make_dirs(cls) -> None:
        cls.log.parent.mkdir(parents=True, exist_ok=True)
        cls.settings.parent.mkdir(parents=True, exist_ok=True)


def grid_size(dims: Sequence[int]) -> int:
    size = 1
    for dim in dims:
        size *= dim
    return size


def format_float(value: float) -> str:
    """Shortest round-tripping text for a float, so CSV output is byte-stable."""
    return repr(float(value))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    with path.open("w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(val) if isinstance(val, float) else val for val in row]
            )


def read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as file:
        return list(csv.DictReader(file))
