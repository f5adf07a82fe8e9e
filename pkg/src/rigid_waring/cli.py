"""Command line entry point ``rigid-waring``."""

from __future__ import annotations

import argparse
import sys

from .harness import EXPERIMENTS, ExperimentConfig, parse_r, run_experiment


def _int_list(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rigid-waring", description="Rigid homotopy experiments on Waring systems.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--n", type=int, default=1, help="number of equations (variables minus one)")
    p.add_argument("--D", type=int, default=3, help="degree of every equation")
    p.add_argument("--r", type=parse_r, default=(4,), help="Waring length, INT or inclusive range A..B")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--max-steps", type=int, default=None, help="default 1e6 for n = 1, else 1e7")
    p.add_argument("--j-list", type=_int_list, default=(1, 2, 3, 4, 5), help="heuristic steps 10^-j, e.g. 1,2,3")
    p.add_argument("--out", default=None, help="output CSV path (default results/<experiment>.csv)")
    p.add_argument("--trace-stride", type=int, default=1)
    p.add_argument("--roots-per-poly", type=int, default=20, help="gamma_sweep only")
    p.add_argument("--workers", type=int, default=1, help="worker processes for independent trials")
    p.add_argument("--engine", choices=("compiled", "numpy"), default="compiled")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig(
            experiment=args.experiment, n=args.n, D=args.D, r=args.r, trials=args.trials, seed=args.seed,
            epsilon=args.epsilon, max_steps=args.max_steps, j_list=args.j_list,
            out=args.out or f"results/{args.experiment}.csv", trace_stride=args.trace_stride,
            roots_per_poly=args.roots_per_poly, workers=args.workers, engine=args.engine)
        result = run_experiment(cfg)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"rigid-waring: {exc}", file=sys.stderr)
        return 1
    for path in result.paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
