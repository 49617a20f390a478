"""Command line interface: optimize, train, eval, compress, plot and data generators.

Results are printed to stdout as JSON; logs go to stderr and the log file.
"""

from __future__ import annotations

import argparse
import cProfile
import json
import logging
import math
import sys
import traceback
from pathlib import Path
from types import TracebackType
from typing import Any, Callable, Sequence

import attrs

from tt_automl.compress import CompressionError
from tt_automl.compress.pipeline import compress_model
from tt_automl.compress.plan import Plan, PlanError, plan_from_json
from tt_automl.constants import ExitCode
from tt_automl.container import ContainerError, read_container, write_container
from tt_automl.cross_optimizer import OptimizerError
from tt_automl.evaluation import Objective, ObjectiveError
from tt_automl.harness.runner import run_experiment
from tt_automl.harness.search_space import SearchSpace, SearchSpaceError, space_from_json
from tt_automl.harness.synthetic import SyntheticName, synthetic
from tt_automl.harness.tabular import (
    BenchmarkError,
    generate_planted_table,
    tabular_from_csv,
    tabular_load,
    tabular_objective,
)
from tt_automl.linalg import NumericError
from tt_automl.logger import get_logger
from tt_automl.nn.data import Dataset, DatasetError, dataset_from_container, gen_bars
from tt_automl.nn.model import ModelError, ModelGraph, bars_cnn, mlp, model_from_container
from tt_automl.nn.train import ClassCountError, TrainingError, accuracy, train
from tt_automl.plotting import TraceFileError, plot_curves, read_curves
from tt_automl.settings import (
    Algorithm,
    Direction,
    Transform,
    get_log_level,
    get_parallelism,
)
from tt_automl.utils import AppPaths, write_csv

_logger = get_logger(__file__)

Summary = dict[str, Any]


@attrs.define
class InputFileError(Exception):
    path: Path
    detail: str

    def __str__(self) -> str:
        return f"cannot read '{self.path}': {self.detail}"


@attrs.define
class SpaceMismatchError(SearchSpaceError):
    space: tuple[int, ...]
    objective: tuple[int, ...]

    def __str__(self) -> str:
        return f"space has sizes {self.space} but the objective has {self.objective}"


_INPUT_ERRORS = (
    BenchmarkError,
    ClassCountError,
    ContainerError,
    DatasetError,
    InputFileError,
    ModelError,
    NumericError,
    ObjectiveError,
    SearchSpaceError,
    TraceFileError,
)


class Args(argparse.Namespace):
    """Command line args for tt_automl. Subcommands add their own options."""

    verbose = False
    profile = False
    func: Callable[[Args], Summary]


def _excepthook(
    error_type: type[BaseException], error: BaseException, tb_type: TracebackType | None
) -> Any:
    text = "    ".join(traceback.format_exception(error_type, error, tb_type)).strip()
    logging.error(f"Uncaught exception:\n    {text}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exception:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer") from exception
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} is not positive")
    return value


def _non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exception:
        raise argparse.ArgumentTypeError(f"'{text}' is not a number") from exception
    if not math.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError(f"{value} must be finite and >= 0")
    return value


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exception:
        raise argparse.ArgumentTypeError(
            f"'{text}' is not a comma-separated list of integers"
        ) from exception
    if not values:
        raise argparse.ArgumentTypeError("the list is empty")
    return values


def _objective_spec(text: str) -> tuple[str, str]:
    kind, _, value = text.partition(":")
    if kind not in ("synthetic", "tabular") or not value:
        raise argparse.ArgumentTypeError(
            f"'{text}' is neither synthetic:<name> nor tabular:<file>"
        )
    if kind == "synthetic":
        try:
            SyntheticName.parse(value)
        except BenchmarkError as exception:
            raise argparse.ArgumentTypeError(str(exception)) from exception
    return kind, value


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exception:
        raise InputFileError(path, str(exception)) from exception


def _read_dataset(path: Path) -> Dataset:
    return dataset_from_container(read_container(path))


def _read_model(path: Path) -> ModelGraph:
    return model_from_container(read_container(path))


def _finite_or_none(value: float) -> float | None:
    return value if math.isfinite(value) else None


def _load_objective(
    spec: tuple[str, str], args: Args
) -> tuple[Objective, SearchSpace, Direction]:
    kind, value = spec
    if kind == "synthetic":
        problem = synthetic(value, args.dims, args.points, args.objective_seed)
        return problem, problem.space, problem.direction
    path = Path(value)
    if path.suffix.lower() == ".csv":
        benchmark = tabular_from_csv(path)
    else:
        benchmark = tabular_load(read_container(path))
    _logger.info(f"Loaded table '{benchmark.name}' with {benchmark.table.size} entries.")
    return tabular_objective(benchmark), benchmark.space, Direction.MAXIMIZE


def _tetraopt_options(args: Args) -> dict[str, Any]:
    """Flag overrides of the TetraOpt settings. Tabular benchmarks use the exp_shift
    transform unless --transform is given."""
    options: dict[str, Any] = {
        "rank": args.rank,
        "sweeps": args.sweeps,
        "delta": args.delta,
        "transform": args.transform,
    }
    if args.transform is None and args.objective[0] == "tabular":
        options["transform"] = Transform.EXP_SHIFT
    return {key: val for key, val in options.items() if val is not None}


def _cmd_optimize(args: Args) -> Summary:
    objective, space, direction = _load_objective(args.objective, args)
    if args.space:
        declared = space_from_json(_read_text(args.space))
        if declared.sizes != space.sizes:
            raise SpaceMismatchError(declared.sizes, space.sizes)
        space = declared
    options = {
        Algorithm.TETRAOPT: _tetraopt_options(args),
        Algorithm.TPE: {} if args.startup is None else {"startup": args.startup},
    }
    result = run_experiment(
        args.algo,
        objective,
        space.sizes,
        args.budget,
        args.seeds,
        args.parallelism or get_parallelism(),
        direction,
        options,
    )
    if args.out:
        result.write_csv(args.out)
    best = None
    for traces in result.traces.values():
        for trace in traces:
            entry = trace.best()
            if entry and (best is None or direction.is_better(entry.value, best.value)):
                best = entry
    return {
        "best_value": None if best is None else _finite_or_none(best.value),
        "best_point": None if best is None else space.decode(best.index),
        "best_index": None if best is None else list(best.index),
        "evals": sum(len(trace) for traces in result.traces.values() for trace in traces),
        "mean_best": {
            str(algo): _finite_or_none(value)
            for algo, value in result.final_means().items()
        },
    }


def _build_model(args: Args, data: Dataset) -> ModelGraph:
    _, channels, height, width = data.images.shape
    if args.arch == "mlp":
        return mlp(
            (channels, height, width), args.hidden, data.class_count, args.seed
        )
    if height != width:
        raise DatasetError(f"bars_cnn needs square images, got {height}x{width}")
    return bars_cnn(height, args.channels, data.class_count, channels, args.seed)


def _cmd_train(args: Args) -> Summary:
    data = _read_dataset(args.data)
    model = _read_model(args.model) if args.model else _build_model(args, data)
    trained, history = train(
        model, data, args.epochs, args.lr, args.momentum, args.batch, args.seed
    )
    write_container(args.out, *trained.to_container())
    if args.history:
        write_csv(args.history, ("epoch", "loss", "accuracy"), history.csv_rows())
    summary: Summary = {
        "params": trained.param_count,
        "epochs": len(history.epochs),
        "train_accuracy": (
            history.epochs[-1].accuracy if history.epochs else accuracy(trained, data)
        ),
    }
    if args.test:
        summary["test_accuracy"] = accuracy(trained, _read_dataset(args.test))
    return summary


def _cmd_eval(args: Args) -> Summary:
    model = _read_model(args.model)
    return {"accuracy": accuracy(model, _read_dataset(args.data), args.workers)}


def _cmd_compress(args: Args) -> Summary:
    model = _read_model(args.model)
    plan = plan_from_json(_read_text(args.plan)) if args.plan else Plan()
    compressed, report = compress_model(model, plan, args.workers)
    if args.data:
        data = _read_dataset(args.data)
        report.accuracy_before = accuracy(model, data, args.workers)
        report.accuracy_after = accuracy(compressed, data, args.workers)
        if args.finetune_epochs:
            compressed, _ = train(
                compressed, data, args.finetune_epochs, args.lr, seed=args.seed
            )
            report.accuracy_finetuned = accuracy(compressed, data, args.workers)
    if args.out:
        write_container(args.out, *compressed.to_container())
    if args.report:
        args.report.write_text(report.to_json() + "\n", encoding="utf-8")
    return {
        "coefficient": report.coefficient,
        "params_before": report.params_before,
        "params_after": report.params_after,
        "bytes_before": report.bytes_before,
        "bytes_after": report.bytes_after,
        "accuracy_before": report.accuracy_before,
        "accuracy_after": report.accuracy_after,
        "accuracy_finetuned": report.accuracy_finetuned,
    }


def _cmd_plot(args: Args) -> Summary:
    curves = read_curves(args.traces)
    plot_curves(curves, args.out, args.title)
    return {"curves": len(curves), "out": str(args.out)}


def _cmd_gen_data(args: Args) -> Summary:
    data = gen_bars(args.n, args.size, args.noise, args.seed)
    write_container(args.out, *data.to_container())
    return {"samples": len(data), "classes": data.class_count, "size": args.size}


def _cmd_gen_table(args: Args) -> Summary:
    planted = generate_planted_table(args.dims, args.seed, args.noise)
    entries, meta = planted.benchmark.to_container()
    meta["planted"] = list(planted.planted)
    write_container(args.out, entries, meta)
    return {
        "planted": list(planted.planted),
        "best_value": planted.benchmark.best()[1],
        "grid_size": planted.benchmark.space.grid_size,
    }


def _add_optimize(commands: Any) -> None:
    parser = commands.add_parser("optimize", help="Run optimizers on an objective.")
    parser.add_argument(
        "--objective",
        type=_objective_spec,
        required=True,
        help="synthetic:<ackley|rosenbrock|schwefel|separable_planted> or "
        "tabular:<container or arch,accuracy CSV>",
    )
    parser.add_argument("--space", type=Path, help="Search space JSON for decoding.")
    parser.add_argument(
        "--algo",
        type=Algorithm,
        choices=list(Algorithm),
        nargs="+",
        default=[Algorithm.TETRAOPT],
    )
    parser.add_argument("--budget", type=_positive_int, default=1000)
    parser.add_argument("--rank", type=_positive_int)
    parser.add_argument("--sweeps", type=_positive_int)
    parser.add_argument("--delta", type=_non_negative_float)
    parser.add_argument("--transform", type=Transform, choices=list(Transform))
    parser.add_argument("--startup", type=_positive_int, help="TPE random startup.")
    parser.add_argument("--seeds", type=_int_list, default=[0], help="e.g. 0,1,2")
    parser.add_argument("--parallelism", type=_positive_int)
    parser.add_argument("--dims", type=_positive_int, default=3, help="Synthetic only.")
    parser.add_argument("--points", type=_positive_int, default=5, help="Synthetic only.")
    parser.add_argument("--objective-seed", type=int, default=0)
    parser.add_argument("--out", type=Path, help="Trace CSV.")
    parser.set_defaults(func=_cmd_optimize)


def _add_train(commands: Any) -> None:
    parser = commands.add_parser("train", help="Train a model on a dataset.")
    parser.add_argument("--data", type=Path, required=True)
    parser.add_argument("--model", type=Path, help="Start from this model container.")
    parser.add_argument("--arch", choices=("bars_cnn", "mlp"), default="bars_cnn")
    parser.add_argument("--channels", type=_positive_int, default=16)
    parser.add_argument("--hidden", type=_positive_int, default=32)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--lr", type=_non_negative_float, default=0.05)
    parser.add_argument("--momentum", type=_non_negative_float)
    parser.add_argument("--batch", type=_positive_int)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--test", type=Path, help="Held-out dataset container.")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--history", type=Path, help="Per-epoch CSV.")
    parser.set_defaults(func=_cmd_train)


def _add_eval(commands: Any) -> None:
    parser = commands.add_parser("eval", help="Accuracy of a model on a dataset.")
    parser.add_argument("--model", type=Path, required=True)
    parser.add_argument("--data", type=Path, required=True)
    parser.add_argument("--workers", type=_positive_int, default=1)
    parser.set_defaults(func=_cmd_eval)


def _add_compress(commands: Any) -> None:
    parser = commands.add_parser("compress", help="Apply a compression plan.")
    parser.add_argument("--model", type=Path, required=True)
    parser.add_argument("--plan", type=Path, help="Plan JSON; no plan compresses nothing.")
    parser.add_argument("--out", type=Path)
    parser.add_argument("--report", type=Path)
    parser.add_argument("--data", type=Path, help="Dataset for accuracy figures.")
    parser.add_argument("--finetune-epochs", type=int, default=0)
    parser.add_argument("--lr", type=_non_negative_float, default=0.01)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=_positive_int, default=1)
    parser.set_defaults(func=_cmd_compress)


def _add_plot(commands: Any) -> None:
    parser = commands.add_parser("plot", help="Best-so-far SVG from trace CSVs.")
    parser.add_argument("--traces", type=Path, nargs="+", required=True)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--title")
    parser.set_defaults(func=_cmd_plot)


def _add_generators(commands: Any) -> None:
    parser = commands.add_parser("gen-data", help="Write a bars dataset container.")
    parser.add_argument("--n", type=_positive_int, default=200)
    parser.add_argument("--size", type=_positive_int, default=8)
    parser.add_argument("--noise", type=_non_negative_float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, required=True)
    parser.set_defaults(func=_cmd_gen_data)

    parser = commands.add_parser("gen-table", help="Write a planted benchmark table.")
    parser.add_argument("--dims", type=_int_list, default=[5] * 6, help="e.g. 5,5,5")
    parser.add_argument("--noise", type=_non_negative_float, default=0.3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, required=True)
    parser.set_defaults(func=_cmd_gen_table)


def _parse_args(argv: Sequence[str] | None) -> Args:
    parser = argparse.ArgumentParser(
        prog="tt_automl",
        description="Tensor-train architecture search and model compression.",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug output to stderr."
    )
    parser.add_argument(
        "-p", "--profile", action="store_true", help="Write profiling data on exit."
    )
    commands = parser.add_subparsers(dest="command", required=True)
    _add_optimize(commands)
    _add_train(commands)
    _add_eval(commands)
    _add_compress(commands)
    _add_plot(commands)
    _add_generators(commands)
    return parser.parse_args(argv, namespace=Args())


def _configure_logging(verbose: bool) -> None:
    stream = logging.StreamHandler(sys.stderr)
    level = get_log_level().upper()
    if level not in logging.getLevelNamesMapping():
        level = "INFO"
    stream.setLevel(logging.DEBUG if verbose else level)
    logging.basicConfig(
        level=logging.DEBUG,
        style="{",
        format="{asctime} [{levelname}] {message}",
        datefmt="%Y-%m-%d %H:%M:%S",
        encoding="utf-8",
        handlers=(logging.FileHandler(AppPaths.log, encoding="utf-8"), stream),
        force=True,
    )


def _with_profile(func: Callable[[Args], Summary], args: Args) -> Summary:
    profiler = cProfile.Profile()
    profiler.enable()
    try:
        return func(args)
    finally:
        profiler.disable()
        profiler.dump_stats(AppPaths.profile)
        _logger.info(f"Profiling data written to {AppPaths.profile}.")


def _fail(code: int, error: Exception) -> int:
    _logger.error(str(error))
    _logger.debug("".join(traceback.format_exception(error)))
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """Runs one command and returns the process exit code."""
    args = _parse_args(argv)
    AppPaths.make_dirs()
    _configure_logging(args.verbose)
    try:
        if args.profile:
            summary = _with_profile(args.func, args)
        else:
            summary = args.func(args)
    except (PlanError, CompressionError) as error:
        return _fail(ExitCode.PLAN, error)
    except OptimizerError as error:
        return _fail(ExitCode.USAGE, error)
    except _INPUT_ERRORS as error:
        return _fail(ExitCode.INPUT, error)
    except TrainingError as error:
        return _fail(ExitCode.FAILURE, error)
    print(json.dumps(summary, indent=2))
    return ExitCode.OK


def cli_entry() -> None:
    sys.excepthook = _excepthook
    sys.exit(main())


if __name__ == "__main__":
    cli_entry()
