"""JSON config schema: load, default-fill, override, and build library objects.

A config file is a JSON object with (all optional) sections::

    problem:      {set, S, A, f, omega}
    schedule:     {alpha: {power: t} | {table: [...]},
                   lambda: {constant: v} | {table: [...]},
                   bounds: [a, b]}
    perturbation: {kind: "none"} | {kind: "uniform_square_over_ksq", seed: int}
    solver:       {algorithm, x1, nmax, anchor, beta, stride,
                   rel_err_target, reference ("auto" | [..] | null)}
    experiment:   {thetas, seeds, nmax, epsilons, deterministic}
    implicit:     {t_values, lambda, inner_tol, inner_max_iter}

Missing fields fall back to the built-in benchmark instance; the fully
resolved config (with every default filled in) is echoed into run metadata,
so re-parsing an emitted config reproduces the identical run.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .operators import (
    AffineMap,
    ConstantAnchor,
    Identity,
    LeastSquaresGradient,
    ProblemSpec,
    TrigContraction,
    get_mapping,
)
from .projections import Ball, Box, Halfspace, Hyperplane, NonnegOrthant, Simplex
from .schedules import (
    ConstantLambda,
    NoPerturbation,
    PowerAlpha,
    ScheduleSpec,
    TableAlpha,
    TableLambda,
    UniformSquarePerturbation,
)
from .solvers import ConfigurationError, ImplicitConfig, SolverConfig, reference_solution
from .experiment import DEFAULT_EPSILONS, DEFAULT_SEEDS, ExperimentConfig

__all__ = [
    "DEFAULT_CONFIG",
    "load_config",
    "resolve_config",
    "apply_overrides",
    "build_problem",
    "build_schedule",
    "build_perturbation",
    "build_solver_config",
    "build_experiment_config",
    "build_implicit_config",
]

DEFAULT_CONFIG = {
    "problem": {
        "set": {"kind": "orthant", "dim": 2},
        "S": {"kind": "identity"},
        "A": {"kind": "least_squares_gradient", "B": [[1.0, 1.0], [2.0, 2.0]], "b": [3.0, 5.0]},
        "f": {"kind": "trig_contraction"},
        "omega": {"kind": "simplex", "total": 2.6, "dim": 2},
    },
    "schedule": {"alpha": {"power": 0.9}, "lambda": {"constant": 0.1}},
    "perturbation": {"kind": "uniform_square_over_ksq", "seed": 1},
    "solver": {
        "algorithm": "perturbed",
        "x1": [2.0, 3.0],
        "nmax": 6000,
        "anchor": None,
        "beta": 0.5,
        "stride": 1,
        "rel_err_target": None,
        "reference": "auto",
    },
    "experiment": {
        "thetas": [0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 0.9, 1.0],
        "seeds": list(DEFAULT_SEEDS),
        "nmax": 6000,
        "epsilons": list(DEFAULT_EPSILONS),
        "deterministic": False,
    },
    "implicit": {
        "t_values": [1.0, 0.1, 0.01, 0.001, 0.0001, 1e-05],
        "lambda": 0.1,
        "inner_tol": 1e-10,
        "inner_max_iter": 20_000_000,
    },
}


def load_config(path) -> dict:
    """Parse a JSON config file; parse errors carry line/column context."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}: top level must be a JSON object")
    return raw


def resolve_config(raw: dict | None) -> tuple[dict, list[str]]:
    """Fill every missing field from the defaults.

    Returns (resolved, defaulted_paths); the second entry lists the dotted
    paths that came from the defaults rather than the user, for the metadata
    echo.
    """
    raw = raw or {}
    unknown = set(raw) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigurationError(f"unknown config section(s): {sorted(unknown)}")
    resolved = {}
    defaulted: list[str] = []
    for section, default_body in DEFAULT_CONFIG.items():
        user_body = raw.get(section)
        if user_body is None:
            resolved[section] = copy.deepcopy(default_body)
            defaulted.append(section)
            continue
        if not isinstance(user_body, dict):
            raise ConfigurationError(f"{section}: must be an object")
        body = {}
        for key, default_value in default_body.items():
            if key in user_body:
                body[key] = copy.deepcopy(user_body[key])
            else:
                body[key] = copy.deepcopy(default_value)
                defaulted.append(f"{section}.{key}")
        for key in user_body:
            if key not in default_body:
                if section == "schedule" and key == "bounds":
                    body[key] = copy.deepcopy(user_body[key])
                else:
                    raise ConfigurationError(f"{section}.{key}: unknown field")
        resolved[section] = body
    return resolved, defaulted


def apply_overrides(raw: dict, overrides: dict) -> dict:
    """Fold CLI overrides into a raw config dict (before default resolution)."""
    raw = copy.deepcopy(raw)

    def section(name):
        return raw.setdefault(name, {})

    if overrides.get("theta") is not None:
        section("experiment")["thetas"] = [overrides["theta"]]
        section("schedule")["alpha"] = {"power": overrides["theta"]}
    if overrides.get("seed") is not None:
        section("experiment")["seeds"] = [overrides["seed"]]
        section("perturbation").update({"kind": "uniform_square_over_ksq", "seed": overrides["seed"]})
    if overrides.get("seeds") is not None:
        section("experiment")["seeds"] = list(overrides["seeds"])
    if overrides.get("nmax") is not None:
        section("experiment")["nmax"] = overrides["nmax"]
        section("solver")["nmax"] = overrides["nmax"]
    if overrides.get("algorithm") is not None:
        section("solver")["algorithm"] = overrides["algorithm"]
    if overrides.get("deterministic"):
        section("experiment")["deterministic"] = True
        section("perturbation").update({"kind": "none"})
        section("perturbation").pop("seed", None)
    if overrides.get("stride") is not None:
        section("solver")["stride"] = overrides["stride"]
    return raw


# --------------------------------------------------------------------------
# builders


def _need(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigurationError(f"{path}: missing required field {key!r}")
    return d[key]


def build_set(d: dict, path: str):
    kind = _need(d, "kind", path)
    try:
        if kind == "orthant":
            return NonnegOrthant(dim=int(_need(d, "dim", path)))
        if kind == "box":
            return Box(lo=_need(d, "lo", path), hi=_need(d, "hi", path))
        if kind == "ball":
            return Ball(center=_need(d, "center", path), radius=float(_need(d, "radius", path)))
        if kind == "halfspace":
            return Halfspace(normal=_need(d, "normal", path), offset=float(_need(d, "offset", path)))
        if kind == "hyperplane":
            return Hyperplane(normal=_need(d, "normal", path), offset=float(_need(d, "offset", path)))
        if kind == "simplex":
            return Simplex(total=float(_need(d, "total", path)), dim=int(_need(d, "dim", path)))
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    raise ConfigurationError(f"{path}.kind: unknown set kind {kind!r}")


def build_mapping(d: dict, dim: int, path: str):
    kind = _need(d, "kind", path)
    try:
        if kind == "identity":
            return Identity(dim=dim)
        if kind == "trig_contraction":
            return TrigContraction()
        if kind == "constant":
            return ConstantAnchor(value=_need(d, "value", path))
        if kind == "least_squares_gradient":
            return LeastSquaresGradient(B=_need(d, "B", path), b=_need(d, "b", path))
        if kind == "affine":
            return AffineMap(M=_need(d, "M", path), c=_need(d, "c", path))
        if kind == "custom":
            return get_mapping(_need(d, "name", path))
    except ConfigurationError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    raise ConfigurationError(f"{path}.kind: unknown mapping kind {kind!r}")


def build_problem(resolved: dict) -> ProblemSpec:
    body = resolved["problem"]
    cset = build_set(body["set"], "problem.set")
    omega = build_set(body["omega"], "problem.omega") if body.get("omega") else None
    try:
        return ProblemSpec(
            set_Q=cset,
            map_S=build_mapping(body["S"], cset.dim, "problem.S"),
            map_A=build_mapping(body["A"], cset.dim, "problem.A"),
            map_f=build_mapping(body["f"], cset.dim, "problem.f"),
            reference_set_omega=omega,
        )
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"problem: {exc}") from None


def build_schedule(resolved: dict) -> ScheduleSpec:
    body = resolved["schedule"]
    alpha_d = body["alpha"]
    if "power" in alpha_d:
        alpha = PowerAlpha(float(alpha_d["power"]))
    elif "table" in alpha_d:
        alpha = TableAlpha(alpha_d["table"])
    else:
        raise ConfigurationError("schedule.alpha: need 'power' or 'table'")
    lam_d = body["lambda"]
    if "constant" in lam_d:
        lam = ConstantLambda(float(lam_d["constant"]))
        default_bounds = (lam.value, lam.value)
    elif "table" in lam_d:
        lam = TableLambda(lam_d["table"])
        default_bounds = (float(min(lam.values)), float(max(lam.values)))
    else:
        raise ConfigurationError("schedule.lambda: need 'constant' or 'table'")
    bounds = tuple(body.get("bounds", default_bounds))
    try:
        return ScheduleSpec(alpha=alpha, lam=lam, bounds=bounds)
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"schedule: {exc}") from None


def build_perturbation(resolved: dict):
    body = resolved["perturbation"]
    kind = _need(body, "kind", "perturbation")
    if kind == "none":
        return NoPerturbation()
    if kind == "uniform_square_over_ksq":
        return UniformSquarePerturbation(seed=int(_need(body, "seed", "perturbation")))
    raise ConfigurationError(f"perturbation.kind: unknown kind {kind!r}")


def build_solver_config(resolved: dict, problem: ProblemSpec | None = None) -> SolverConfig:
    problem = problem or build_problem(resolved)
    body = resolved["solver"]
    reference = body.get("reference", "auto")
    if reference == "auto":
        reference = (
            reference_solution(problem, tol=1e-12)
            if problem.reference_set_omega is not None
            else None
        )
    try:
        return SolverConfig(
            problem=problem,
            schedule=build_schedule(resolved),
            x1=body["x1"],
            n_max=int(body["nmax"]),
            algorithm=str(body["algorithm"]),
            perturbation=build_perturbation(resolved),
            anchor=body.get("anchor"),
            beta=float(body.get("beta", 0.5)),
            reference=reference,
            rel_err_target=body.get("rel_err_target"),
            record_stride=int(body.get("stride", 1)),
        )
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"solver: {exc}") from None


def build_experiment_config(resolved: dict, problem: ProblemSpec | None = None) -> ExperimentConfig:
    problem = problem or build_problem(resolved)
    body = resolved["experiment"]
    lam_d = resolved["schedule"]["lambda"]
    if "constant" not in lam_d:
        raise ConfigurationError("experiment: schedule.lambda must be constant for the sweep")
    try:
        return ExperimentConfig(
            thetas=tuple(body["thetas"]),
            seeds=tuple(body["seeds"]),
            n_max=int(body["nmax"]),
            epsilons=tuple(body["epsilons"]),
            problem=problem,
            x1=resolved["solver"]["x1"],
            lam=float(lam_d["constant"]),
            deterministic=bool(body["deterministic"]),
        )
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"experiment: {exc}") from None


def build_implicit_config(resolved: dict) -> ImplicitConfig:
    body = resolved["implicit"]
    try:
        return ImplicitConfig(
            t_values=tuple(body["t_values"]),
            lambda_of_t=float(body["lambda"]),
            inner_tol=float(body["inner_tol"]),
            inner_max_iter=int(body["inner_max_iter"]),
        )
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"implicit: {exc}") from None
