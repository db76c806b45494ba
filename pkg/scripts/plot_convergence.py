#!/usr/bin/env python3
"""Plot rel_err vs iteration (log scale) for several theta values.

Usage:
    python scripts/plot_convergence.py [--out convergence.png] [--seed S]
                                       [--thetas 0.6 0.8 0.9 1.0] [--nmax N]

Runs one perturbed trace per theta and renders the convergence curves; this
is the plot-ready view of the (k, rel_err) trace columns.
"""

import argparse
from pathlib import Path

from viscosolve import (
    PERTURBED,
    SolverConfig,
    UniformSquarePerturbation,
    benchmark_schedule,
    build_benchmark_problem,
    reference_solution,
    run,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("convergence.png"))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--thetas", type=float, nargs="+", default=[0.6, 0.8, 0.9, 1.0])
    ap.add_argument("--nmax", type=int, default=6000)
    args = ap.parse_args()

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise SystemExit("matplotlib is required for plotting: pip install matplotlib")

    problem = build_benchmark_problem()
    qref = reference_solution(problem, tol=1e-12)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for theta in args.thetas:
        cfg = SolverConfig(
            problem=problem,
            schedule=benchmark_schedule(theta, problem=problem),
            x1=[2.0, 3.0],
            n_max=args.nmax,
            algorithm=PERTURBED,
            perturbation=UniformSquarePerturbation(args.seed),
            reference=qref,
        )
        trace = run(cfg)
        ax.semilogy(trace.k, trace.rel_err, label=f"theta = {theta:g}", linewidth=1.0)

    ax.set_xlabel("iteration k")
    ax.set_ylabel("relative error to the reference point")
    ax.set_title("Effect of the mixing exponent on convergence")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
