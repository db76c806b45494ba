#!/usr/bin/env python3
"""Reproduce the full benchmark study: theta sweep, summary tables, traces.

Usage:
    python scripts/run_benchmark.py [--out DIR] [--seeds N] [--nmax N] [--deterministic]

Runs the perturbed rule for theta in {0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 0.9, 1.0}
over a seed grid, then writes report.csv, table1-3 and all traces.
"""

import argparse
import time
from pathlib import Path

from viscosolve import ExperimentConfig, emit_report, emit_tables, run_experiment

THETAS = (0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 0.9, 1.0)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("runs/benchmark"))
    ap.add_argument("--seeds", type=int, default=20, help="number of seeds (1..N)")
    ap.add_argument("--nmax", type=int, default=6000)
    ap.add_argument("--deterministic", action="store_true", help="disable perturbations")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        thetas=THETAS,
        seeds=tuple(range(1, args.seeds + 1)),
        n_max=args.nmax,
        deterministic=args.deterministic,
    )
    t0 = time.perf_counter()
    report = run_experiment(cfg)
    print(f"swept {len(report.cells)} cells in {time.perf_counter() - t0:.1f} s")

    emit_report(report, args.out)
    emit_tables(report, args.out)
    print(f"wrote {args.out}/report.csv, tables and traces")
    for name in ("table1.txt", "table2.txt", "table3.txt"):
        path = args.out / name
        if path.exists():
            print(f"\n{name}\n{path.read_text()}", end="")


if __name__ == "__main__":
    main()
