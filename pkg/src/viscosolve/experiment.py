"""Benchmark study: how the mixing exponent theta drives the convergence rate.

The built-in 2-D benchmark minimizes phi(x) = 0.5 ||B x - b||^2 over the
nonnegative quadrant with B = [[1, 1], [2, 2]], b = (3, 5), steered by the
trigonometric contraction. Its solution set is the simplex slice
{x >= 0 : x1 + x2 = 2.6}, which gives an independent closed-form route to
the limit point (fixed point of the projection onto that slice composed with
the contraction).

The harness sweeps theta over a seed grid with the perturbed rule, records
min_{k <= n_max} rel_err and the first-hit indices N(eps, theta), and emits
a frozen directory layout::

    report.csv                      one row per (theta, seed) cell
    table1.csv / table1.txt         median min rel_err for theta < 0.5
    table2.csv / table2.txt         median min rel_err for theta >= 0.5
    table3.csv / table3.txt         N(eps, theta) grid, ND for never-hit
    traces/theta_<t>_seed_<s>.csv   full per-iteration traces
    meta.txt                        seeds, PRNG, config digest, reference

All numbers use shortest round-trip float formatting; reruns are
byte-identical for fixed seeds.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .operators import Identity, LeastSquaresGradient, ProblemSpec, TrigContraction
from .projections import NonnegOrthant, Simplex
from .schedules import (
    ConstantLambda,
    NoPerturbation,
    PowerAlpha,
    ScheduleSpec,
    UniformSquarePerturbation,
)
from .solvers import PERTURBED, RunTrace, SolverConfig, config_digest, reference_solution, run
from .space import as_vector

__all__ = [
    "build_benchmark_problem",
    "benchmark_schedule",
    "BENCHMARK_X1",
    "DEFAULT_EPSILONS",
    "DEFAULT_SEEDS",
    "ExperimentConfig",
    "CellResult",
    "ExperimentReport",
    "run_experiment",
    "emit_trace",
    "emit_tables",
    "emit_report",
]

DEFAULT_EPSILONS = (0.5, 0.10, 0.05, 0.01, 0.005, 0.001)
DEFAULT_SEEDS = tuple(range(1, 21))
BENCHMARK_X1 = (2.0, 3.0)

_ND = "ND"


def build_benchmark_problem() -> ProblemSpec:
    """The built-in 2-D constrained least-squares instance.

    Q = nonnegative quadrant, S = identity, A = gradient of
    0.5 ||B x - b||^2 with B = [[1, 1], [2, 2]] and b = (3, 5) (Lipschitz
    constant 10, cocoercivity modulus 0.1), f = the trigonometric
    contraction. The target set is the simplex slice {x >= 0 : sum x = 2.6}.
    """
    return ProblemSpec(
        set_Q=NonnegOrthant(dim=2),
        map_S=Identity(dim=2),
        map_A=LeastSquaresGradient(B=[[1.0, 1.0], [2.0, 2.0]], b=[3.0, 5.0]),
        map_f=TrigContraction(),
        reference_set_omega=Simplex(total=2.6, dim=2),
    )


def benchmark_schedule(theta: float, lam: float | None = None, problem: ProblemSpec | None = None) -> ScheduleSpec:
    """alpha_k = k**(-theta) with a constant relaxation step (default 1/L = nu)."""
    if lam is None:
        lam = (problem or build_benchmark_problem()).nu
    return ScheduleSpec(alpha=PowerAlpha(theta), lam=ConstantLambda(lam), bounds=(lam, lam))


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """The (theta, seed) sweep of the perturbed rule on one problem."""

    thetas: tuple[float, ...]
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    n_max: int = 6000
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    problem: ProblemSpec = field(default_factory=build_benchmark_problem)
    x1: np.ndarray = field(default_factory=lambda: np.array(BENCHMARK_X1))
    lam: float | None = None
    deterministic: bool = False

    def __post_init__(self):
        thetas = tuple(float(t) for t in self.thetas)
        if not thetas:
            raise ValueError("thetas must be nonempty")
        object.__setattr__(self, "thetas", thetas)
        seeds = (0,) if self.deterministic else tuple(int(s) for s in self.seeds)
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "x1", as_vector(self.x1, dim=self.problem.dim, name="x1"))
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def lam_value(self) -> float:
        return self.problem.nu if self.lam is None else float(self.lam)


@dataclass(frozen=True, eq=False)
class CellResult:
    theta: float
    seed: int
    min_rel_err: float
    first_hit: dict
    trace: RunTrace | None
    error: str | None = None


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    config: ExperimentConfig
    reference: np.ndarray
    cells: tuple[CellResult, ...]

    def cells_for(self, theta: float) -> list[CellResult]:
        return [c for c in self.cells if c.theta == theta and c.error is None]

    def aggregate(self) -> dict:
        """Per theta: (median, min, max) of min_rel_err over seeds."""
        out = {}
        for theta in self.config.thetas:
            vals = [c.min_rel_err for c in self.cells_for(theta)]
            if vals:
                out[theta] = (statistics.median(vals), min(vals), max(vals))
        return out

    def first_hit_grid(self) -> dict:
        """grid[eps][theta] = lower median over seeds of N(eps, theta); None for ND.

        A seed that never reaches eps counts as +inf, so the cell is ND as
        soon as half the seeds miss.
        """
        grid = {}
        for eps in self.config.epsilons:
            row = {}
            for theta in self.config.thetas:
                hits = [
                    c.first_hit[eps] if c.first_hit[eps] is not None else float("inf")
                    for c in self.cells_for(theta)
                ]
                if not hits:
                    row[theta] = None
                    continue
                med = statistics.median_low(sorted(hits))
                row[theta] = None if med == float("inf") else int(med)
            grid[eps] = row
        return grid


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the perturbed rule for each (theta, seed) cell.

    Each cell starts from cfg.x1, runs n_max iterations and measures
    rel_err against the reference solution computed once at tolerance 1e-12.
    Per-cell solver failures are recorded without aborting the sweep.
    Deterministic per (theta, seed).
    """
    qref = reference_solution(cfg.problem, tol=1e-12)
    cells = []
    for theta in cfg.thetas:
        schedule = benchmark_schedule(theta, lam=cfg.lam_value, problem=cfg.problem)
        for seed in cfg.seeds:
            perturbation = NoPerturbation() if cfg.deterministic else UniformSquarePerturbation(seed)
            solver_cfg = SolverConfig(
                problem=cfg.problem,
                schedule=schedule,
                x1=cfg.x1,
                n_max=cfg.n_max,
                algorithm=PERTURBED,
                perturbation=perturbation,
                reference=qref,
            )
            try:
                trace = run(solver_cfg, extra_metadata={"theta": theta, "cell_seed": seed})
            except Exception as exc:  # record the failure, keep sweeping
                cells.append(
                    CellResult(theta, seed, float("nan"), {e: None for e in cfg.epsilons}, None, error=str(exc))
                )
                continue
            hits = {eps: trace.first_hit(eps) for eps in cfg.epsilons}
            cells.append(CellResult(theta, seed, trace.min_rel_err(), hits, trace))
    return ExperimentReport(config=cfg, reference=qref, cells=tuple(cells))


# --------------------------------------------------------------------------
# emission


def _fmt(v) -> str:
    return repr(float(v))


def emit_trace(trace: RunTrace, path) -> Path:
    """Write one trace as CSV; the (k, rel_err) columns are the plot-ready series."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace.write_csv(path)
    return path


def _aligned(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows) + "\n"


def emit_tables(report: ExperimentReport, out_dir) -> list[Path]:
    """Write the three summary tables (CSV plus aligned text).

    Table 1 covers theta < 0.5, table 2 covers theta >= 0.5 (median
    min rel_err with min/max spread over seeds); table 3 is the
    N(eps, theta) grid with ND for cells that never reach eps. Table 3 is
    omitted when the epsilon list is empty.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    agg = report.aggregate()
    written = []

    for name, selector in (("table1", lambda t: t < 0.5), ("table2", lambda t: t >= 0.5)):
        thetas = [t for t in report.config.thetas if selector(t) and t in agg]
        if not thetas:
            continue
        csv_lines = ["theta,median_min_rel_err,min,max,n_seeds"]
        txt_rows = [["theta", "median min rel_err", "min", "max"]]
        for t in thetas:
            med, lo, hi = agg[t]
            n_seeds = len(report.cells_for(t))
            csv_lines.append(f"{_fmt(t)},{_fmt(med)},{_fmt(lo)},{_fmt(hi)},{n_seeds}")
            txt_rows.append([f"{t:g}", f"{med:.4f}", f"{lo:.4f}", f"{hi:.4f}"])
        (out_dir / f"{name}.csv").write_text("\n".join(csv_lines) + "\n")
        (out_dir / f"{name}.txt").write_text(_aligned(txt_rows))
        written += [out_dir / f"{name}.csv", out_dir / f"{name}.txt"]

    if report.config.epsilons:
        grid = report.first_hit_grid()
        thetas = list(report.config.thetas)
        header = "eps," + ",".join(f"theta_{_fmt(t)}" for t in thetas)
        csv_lines = [header]
        txt_rows = [["eps"] + [f"theta={t:g}" for t in thetas]]
        for eps in report.config.epsilons:
            cells = [grid[eps][t] for t in thetas]
            csv_lines.append(
                ",".join([_fmt(eps)] + [_ND if c is None else str(c) for c in cells])
            )
            txt_rows.append([f"{eps:g}"] + [_ND if c is None else str(c) for c in cells])
        (out_dir / "table3.csv").write_text("\n".join(csv_lines) + "\n")
        (out_dir / "table3.txt").write_text(_aligned(txt_rows))
        written += [out_dir / "table3.csv", out_dir / "table3.txt"]
    return written


def emit_report(report: ExperimentReport, out_dir) -> Path:
    """Write report.csv, all traces and meta.txt under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    eps = report.config.epsilons

    header = "theta,seed,min_rel_err," + ",".join(f"hit_{_fmt(e)}" for e in eps) + ",trace,error"
    lines = [header]
    for c in report.cells:
        trace_name = f"traces/theta_{_fmt(c.theta)}_seed_{c.seed}.csv"
        if c.trace is not None:
            emit_trace(c.trace, out_dir / trace_name)
        hit_cells = [_ND if c.first_hit[e] is None else str(c.first_hit[e]) for e in eps]
        lines.append(
            ",".join(
                [_fmt(c.theta), str(c.seed), _fmt(c.min_rel_err)]
                + hit_cells
                + [trace_name if c.trace is not None else "", c.error or ""]
            )
        )
    (out_dir / "report.csv").write_text("\n".join(lines) + "\n")

    pert_kind = "none" if report.config.deterministic else "uniform_square_over_ksq"
    prng = "none" if report.config.deterministic else "numpy-pcg64"
    meta = {
        "algorithm": PERTURBED,
        "perturbation": pert_kind,
        "prng": prng,
        "seeds": list(report.config.seeds),
        "thetas": list(report.config.thetas),
        "epsilons": list(report.config.epsilons),
        "n_max": report.config.n_max,
        "lambda": report.config.lam_value,
        "x1": report.config.x1.tolist(),
        "deterministic": report.config.deterministic,
        "reference": report.reference.tolist(),
        "config_digest": config_digest(report.config),
    }
    (out_dir / "meta.txt").write_text("".join(f"{k}: {meta[k]}\n" for k in sorted(meta)))
    return out_dir
