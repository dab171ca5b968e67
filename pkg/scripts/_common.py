"""Shared helpers for the experiment scripts."""

import argparse
import csv
import logging

from risbeam.cli import parse_config, run_experiment


def parser(description: str, default_realizations: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", help="optional key = value file applied before the flags below")
    p.add_argument("--realizations", type=int, default=default_realizations)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(experiment: str, args, **extra) -> dict:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    overrides = dict(
        experiment=experiment, realizations=args.realizations, master_seed=args.seed, out=args.out, **extra
    )
    paths = run_experiment(parse_config(args.config, overrides))
    print_table(paths["summary"])
    return paths


def print_table(path) -> None:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{'method':<15}{'point':>10}{'n':>6}{'SE mean':>12}{'SE std':>10}")
    for r in rows:
        print(
            f"{r['method']:<15}{r['sweep_value']:>10}{r['realizations']:>6}"
            f"{float(r['se_mean']):>12.3f}{float(r['se_std']):>10.3f}"
        )
