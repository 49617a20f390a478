"""Every command re-run with identical flags writes identical bytes."""

from pathlib import Path

import pytest

from tt_automl.constants import ExitCode
from tt_automl.main import main


def _twice(tmp_path: Path, *argv: str, output: str) -> tuple[bytes, bytes]:
    results = []
    for run in ("a", "b"):
        out = tmp_path.joinpath(f"{run}{output}")
        assert main([*argv, "--out", str(out)]) == ExitCode.OK
        results.append(out.read_bytes())
    return results[0], results[1]


@pytest.fixture(name="bars")
def fixture_bars(tmp_path: Path) -> Path:
    path = tmp_path.joinpath("bars.taml")
    assert main(["gen-data", "--n", "40", "--out", str(path)]) == ExitCode.OK
    return path


@pytest.fixture(name="table")
def fixture_table(tmp_path: Path) -> Path:
    path = tmp_path.joinpath("table.taml")
    assert main(["gen-table", "--seed", "3", "--out", str(path)]) == ExitCode.OK
    return path


def test_generators(tmp_path: Path) -> None:
    first, second = _twice(tmp_path, "gen-data", "--n", "20", output=".taml")
    assert first == second
    first, second = _twice(tmp_path, "gen-table", "--dims", "3,4", output="t.taml")
    assert first == second


def test_optimize_and_plot(tmp_path: Path, table: Path) -> None:
    argv = ["optimize", "--objective", f"tabular:{table}", "--budget", "300"]
    argv += ["--algo", "tetraopt", "random", "tpe", "--seeds", "0,1"]
    first, second = _twice(tmp_path, *argv, output=".csv")
    assert first == second
    traces = tmp_path.joinpath("a.csv")
    first, second = _twice(tmp_path, "plot", "--traces", str(traces), output=".svg")
    assert first == second


def test_train_and_compress(tmp_path: Path, bars: Path) -> None:
    argv = ["train", "--data", str(bars), "--channels", "4", "--epochs", "2"]
    first, second = _twice(tmp_path, *argv, output=".taml")
    assert first == second
    plan = tmp_path.joinpath("plan.json")
    plan.write_text(
        '{"default": [{"op": "prune", "sparsity": 0.5}, {"op": "quant", "bits": 8}]}',
        encoding="utf-8",
    )
    model = str(tmp_path.joinpath("a.taml"))
    argv = ["compress", "--model", model, "--plan", str(plan), "--workers", "3"]
    first, second = _twice(tmp_path, *argv, output="c.taml")
    assert first == second
