"""Best-so-far figures as self-contained SVG."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import attrs
import matplotlib

matplotlib.use("Agg")

# pylint: disable=wrong-import-position
from matplotlib.figure import Figure

from tt_automl.constants import TRACE_CSV_COLUMNS
from tt_automl.logger import get_logger
from tt_automl.utils import read_csv

_logger = get_logger(__file__)

# fixed ids and no timestamp, so identical traces give identical bytes
_SVG_STYLE = {"svg.hashsalt": "tt_automl", "svg.fonttype": "none"}


@attrs.define
class TraceFileError(Exception):
    path: Path
    detail: str

    def __str__(self) -> str:
        return f"bad trace file '{self.path}': {self.detail}"


@attrs.frozen
class Curve:
    """Best-so-far series of one (algo, seed) run."""

    label: str
    ordinals: list[int]
    best: list[float]


def curves_from_rows(rows: Iterable[dict[str, str]], path: Path) -> list[Curve]:
    series: dict[tuple[str, str], tuple[list[int], list[float]]] = {}
    for line, row in enumerate(rows, start=2):
        try:
            key = (row["algo"], row["seed"])
            ordinal = int(row["eval_ordinal"])
            best = float(row["best_so_far"])
        except (KeyError, TypeError, ValueError) as exception:
            raise TraceFileError(path, f"line {line}: {exception}") from exception
        ordinals, values = series.setdefault(key, ([], []))
        ordinals.append(ordinal)
        values.append(best)
    return [
        Curve(f"{algo}#{seed}", ordinals, values)
        for (algo, seed), (ordinals, values) in series.items()
    ]


def read_curves(paths: Sequence[Path]) -> list[Curve]:
    curves: list[Curve] = []
    for path in paths:
        try:
            rows = read_csv(path)
        except (OSError, UnicodeDecodeError) as exception:
            raise TraceFileError(path, str(exception)) from exception
        if rows and set(TRACE_CSV_COLUMNS) - set(rows[0]):
            raise TraceFileError(path, f"expected columns {', '.join(TRACE_CSV_COLUMNS)}")
        curves.extend(curves_from_rows(rows, path))
    return curves


def plot_curves(curves: Sequence[Curve], out: Path, title: str | None = None) -> None:
    """One polyline per curve, x = model runs, y = best value."""
    with matplotlib.rc_context(_SVG_STYLE):
        figure = Figure(figsize=(6.4, 4.0))
        axes = figure.add_subplot()
        for curve in curves:
            axes.plot(curve.ordinals, curve.best, label=curve.label, linewidth=1.2)
        axes.set_xlabel("model runs")
        axes.set_ylabel("best value")
        if title:
            axes.set_title(title)
        if curves:
            axes.legend(fontsize="small")
        axes.grid(alpha=0.3)
        figure.savefig(out, format="svg", metadata={"Date": None})
    _logger.info(f"Wrote {len(curves)} curves to {out}.")
