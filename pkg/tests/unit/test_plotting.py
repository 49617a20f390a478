"""Tests for best-so-far figures."""

from pathlib import Path

import pytest

from tt_automl.constants import TRACE_CSV_COLUMNS
from tt_automl.plotting import (
    TraceFileError,
    curves_from_rows,
    plot_curves,
    read_curves,
)
from tt_automl.utils import write_csv

ROWS = [
    ("tetraopt", 0, 1, 1.0, 1.0),
    ("tetraopt", 0, 2, 3.0, 3.0),
    ("random", 0, 1, 2.0, 2.0),
    ("tetraopt", 1, 1, 0.5, 0.5),
]


def _traces(path: Path) -> Path:
    write_csv(path, TRACE_CSV_COLUMNS, ROWS)
    return path


def test_curves_group_by_algo_and_seed(tmp_path: Path) -> None:
    curves = read_curves([_traces(tmp_path.joinpath("t.csv"))])
    assert [curve.label for curve in curves] == ["tetraopt#0", "random#0", "tetraopt#1"]
    assert curves[0].ordinals == [1, 2]
    assert curves[0].best == [1.0, 3.0]


def test_bad_row(tmp_path: Path) -> None:
    rows = [{"algo": "tpe", "seed": "0", "eval_ordinal": "x", "best_so_far": "1"}]
    with pytest.raises(TraceFileError):
        curves_from_rows(rows, tmp_path)


def test_missing_columns(tmp_path: Path) -> None:
    path = tmp_path.joinpath("t.csv")
    write_csv(path, ("algo", "value"), [("tpe", 1.0)])
    with pytest.raises(TraceFileError):
        read_curves([path])


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(TraceFileError):
        read_curves([tmp_path.joinpath("missing.csv")])


def test_svg_is_reproducible(tmp_path: Path) -> None:
    curves = read_curves([_traces(tmp_path.joinpath("t.csv"))])
    first, second = tmp_path.joinpath("a.svg"), tmp_path.joinpath("b.svg")
    plot_curves(curves, first, "planted table")
    plot_curves(curves, second, "planted table")
    text = first.read_text(encoding="utf-8")
    assert text.startswith("<?xml")
    assert "model runs" in text
    assert "best value" in text
    assert "tetraopt#1" in text
    assert first.read_bytes() == second.read_bytes()
