"""Converts a NATS topology export (columns `arch,accuracy`) to a table container."""

import argparse
import sys
from pathlib import Path

from tt_automl.container import write_container
from tt_automl.harness.tabular import (
    BenchmarkError,
    reference_reachable,
    tabular_from_csv,
)


def main(source: Path, target: Path, name: str) -> None:
    try:
        benchmark = tabular_from_csv(source, name)
    except BenchmarkError as exception:
        print(f"Import failed: {exception}")
        sys.exit(3)
    write_container(target, *benchmark.to_container())
    index, best = benchmark.best()
    print(f"{benchmark.table.size} entries written to {target}.")
    print(f"Best accuracy {best:.2f} at {benchmark.space.decode(index)}.")
    if not reference_reachable(benchmark):
        print("Note: the maximum differs from the published best of 93.7.")


def cli_entry() -> None:
    parser = argparse.ArgumentParser(
        description="Builds a tabular benchmark container from a NATS CSV export."
    )
    parser.add_argument("--source", "-s", required=True, help="the CSV export")
    parser.add_argument("--target", "-t", required=True, help="container to write")
    parser.add_argument("--name", "-n", default="nats-topology")
    args = parser.parse_args()
    main(Path(args.source), Path(args.target), args.name)


if __name__ == "__main__":
    cli_entry()
