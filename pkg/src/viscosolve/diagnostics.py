"""Runtime property checks backing the ``check`` CLI command.

Each check evaluates one structural inequality the convergence theory relies
on, over seeded random samples, and reports its worst violation. These mirror
the test suite but run against whatever problem the user configured.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import LeastSquaresGradient, ProblemSpec, viscosity_map
from .projections import project, sample
from .solvers import reference_solution
from .space import inner, norm

__all__ = ["CheckResult", "run_property_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str


def _gauss_points(rng, dim, n, scale=2.0):
    return rng.normal(scale=scale, size=(n, dim))


def run_property_checks(
    problem: ProblemSpec,
    *,
    seed: int = 0,
    n_pairs: int = 1000,
    lambdas: tuple[float, ...] = (0.05, 0.1, 0.19),
) -> list[CheckResult]:
    """Run the structural property battery; returns one result per check."""
    rng = np.random.default_rng(seed)
    Q = problem.set_Q
    d = problem.dim
    results = []

    def add(name, worst, tol, detail=""):
        results.append(CheckResult(name, bool(worst <= tol), float(worst), detail or f"tol {tol:g}"))

    # projection idempotence: ||P(P x) - P x|| <= 1e-12
    xs = _gauss_points(rng, d, n_pairs)
    worst = max(norm(project(Q, project(Q, x)) - project(Q, x)) for x in xs)
    add("projection_idempotence", worst, 1e-12)

    # variational characterization: <P x - x, P x - y> <= 1e-10 for y in Q
    ys = sample(Q, rng, n_pairs)
    worst = max(
        inner(project(Q, x) - x, project(Q, x) - y) for x, y in zip(xs, ys)
    )
    add("projection_variational", worst, 1e-10)

    # firm nonexpansiveness: ||Px - Py||^2 - <Px - Py, x - y> <= 1e-10
    xs2 = _gauss_points(rng, d, n_pairs)
    worst = max(
        norm(project(Q, x) - project(Q, y)) ** 2 - inner(project(Q, x) - project(Q, y), x - y)
        for x, y in zip(xs, xs2)
    )
    add("projection_firmly_nonexpansive", worst, 1e-10)

    # cocoercivity: nu ||Ax - Ay||^2 - <Ax - Ay, x - y> <= 1e-10 on Q
    A, nu = problem.map_A, problem.nu
    ps, qs = sample(Q, rng, n_pairs), sample(Q, rng, n_pairs)
    worst = max(
        nu * norm(A(p) - A(q)) ** 2 - inner(A(p) - A(q), p - q) for p, q in zip(ps, qs)
    )
    add("ism_inequality", worst, 1e-10, f"nu = {nu:g}")

    # forward-step descent: ||(I-lam A)x - (I-lam A)y||^2
    #   <= ||x-y||^2 - lam (2 nu - lam) ||Ax-Ay||^2 + 1e-10
    for lam in lambdas:
        worst = max(
            norm((p - lam * A(p)) - (q - lam * A(q))) ** 2
            - (norm(p - q) ** 2 - lam * (2 * nu - lam) * norm(A(p) - A(q)) ** 2)
            for p, q in zip(ps, qs)
        )
        add(f"descent_inequality_lambda_{lam:g}", worst, 1e-10)

    # viscosity contraction factor: ||T x - T y|| <= (1 - sigma t) ||x - y||
    for t in (0.1, 0.5, 1.0):
        worst = max(
            norm(viscosity_map(p, problem, t, nu) - viscosity_map(q, problem, t, nu))
            - (1 - problem.sigma * t) * norm(p - q)
            for p, q in zip(ps, qs)
        )
        add(f"viscosity_contraction_t_{t:g}", worst, 1e-10)

    # contraction modulus of f as measured ratio
    rho = problem.rho
    worst = max(
        norm(np.asarray(problem.map_f(p)) - np.asarray(problem.map_f(q))) - rho * norm(p - q)
        for p, q in zip(ps, qs)
    )
    add("contraction_modulus_f", worst, 1e-8, f"rho = {rho:g}")

    # gradient vs central finite differences (least-squares operators only)
    if isinstance(A, LeastSquaresGradient):
        h = 1e-6
        worst = 0.0
        for p in ps[:50]:
            g = A(p)
            fd = np.empty(d)
            for i in range(d):
                dp = np.zeros(d)
                dp[i] = h * max(1.0, abs(p[i]))
                fd[i] = (A.objective(p + dp) - A.objective(p - dp)) / (2 * dp[i])
            worst = max(worst, norm(fd - g) / max(norm(g), 1e-12))
        add("gradient_finite_difference", worst, 1e-6)

    # target-point inequality: <f(q*) - q*, x - q*> <= 1e-8 over the target set
    if problem.reference_set_omega is not None:
        qstar = reference_solution(problem, tol=1e-12)
        gap = np.asarray(problem.map_f(qstar)) - qstar
        omega_pts = sample(problem.reference_set_omega, rng, n_pairs)
        worst = max(inner(gap, x - qstar) for x in omega_pts)
        add("target_variational_inequality", worst, 1e-8)

    return results
