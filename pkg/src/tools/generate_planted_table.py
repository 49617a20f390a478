"""Writes a benchmark container with a planted global optimum."""

import argparse
from pathlib import Path

from tt_automl.container import write_container
from tt_automl.harness.tabular import generate_planted_table


def main(target: Path, dims: list[int], seeds: list[int], noise: float) -> None:
    for seed in seeds:
        planted = generate_planted_table(dims, seed, noise)
        entries, meta = planted.benchmark.to_container()
        meta["planted"] = list(planted.planted)
        path = target / f"planted_{seed}.taml" if len(seeds) > 1 else target
        write_container(path, entries, meta)
        print(
            f"{path}: optimum {planted.benchmark.best()[1]:.3f} at {planted.planted}"
        )


def cli_entry() -> None:
    parser = argparse.ArgumentParser(
        description="Generates NATS-shaped tables with a known optimum for testing "
        "optimizers."
    )
    parser.add_argument(
        "--target",
        "-t",
        required=True,
        help="output file, or a directory when several seeds are given",
    )
    parser.add_argument("--dims", "-d", default="5,5,5,5,5,5", help="e.g. 5,5,5")
    parser.add_argument("--seeds", "-s", default="0", help="e.g. 0,1,2")
    parser.add_argument("--noise", "-n", type=float, default=0.3)
    args = parser.parse_args()
    seeds = [int(seed) for seed in args.seeds.split(",")]
    target = Path(args.target)
    if len(seeds) > 1:
        target.mkdir(parents=True, exist_ok=True)
    main(target, [int(dim) for dim in args.dims.split(",")], seeds, args.noise)


if __name__ == "__main__":
    cli_entry()
