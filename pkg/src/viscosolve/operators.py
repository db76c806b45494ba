"""Mapping layer: contractions, nonexpansive maps, cocoercive operators.

A mapping is any callable on 1-D float64 arrays carrying two optional
attributes:

* ``lipschitz``   -- a certified upper bound on its Lipschitz constant
  (None when unknown);
* ``ism_modulus`` -- nu such that <Fx - Fy, x - y> >= nu * ||Fx - Fy||^2
  (inverse strong monotonicity / cocoercivity; None when not certified).

:class:`ProblemSpec` bundles a constraint set Q with a nonexpansive S, a
cocoercive A and a contraction f; the composite operators built here are

* ``forward_step``:  x - lam * A(x)
* ``theta_map``:     P_Q(x - lam * A(x)), nonexpansive for lam in (0, 2 nu]
* ``viscosity_map``: t f(x) + (1 - t) S(P_Q(x - mu A(x))),
  a contraction with factor <= 1 - (1 - rho) t.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np

from .projections import ConvexSet, contains, project, sample
from .schedules import ScheduleViolationError, ScheduleViolationWarning
from .space import DimensionMismatchError, NonFiniteError, as_vector

__all__ = [
    "ParameterError",
    "UnknownMappingError",
    "Identity",
    "TrigContraction",
    "ConstantAnchor",
    "LeastSquaresGradient",
    "AffineMap",
    "RegisteredMapping",
    "register_mapping",
    "get_mapping",
    "ProblemSpec",
    "apply",
    "forward_step",
    "theta_map",
    "viscosity_map",
    "ls_lipschitz",
]


class ParameterError(ValueError):
    """An algorithm parameter left its admissible interval."""


class UnknownMappingError(KeyError):
    """No mapping registered under the requested name."""


@dataclass(frozen=True)
class Identity:
    dim: int
    lipschitz: ClassVar[float] = 1.0
    ism_modulus: ClassVar[float] = 1.0

    def __call__(self, x):
        return x


@dataclass(frozen=True)
class TrigContraction:
    """f(x) = ((5 + cos(x1 + x2)) / 2, (6 - sin(x1 + x2)) / 2) on the plane.

    Depends on the input only through the coordinate sum; the mean value
    theorem certifies the Lipschitz modulus sqrt(2)/2 (the exact modulus may
    be smaller). Maps the nonnegative quadrant into [2, 3] x [2.5, 3.5].
    """

    dim: ClassVar[int] = 2
    lipschitz: ClassVar[float] = math.sqrt(2) / 2
    ism_modulus: ClassVar[None] = None

    def __call__(self, x):
        s = float(x[0]) + float(x[1])
        return np.array([(5.0 + math.cos(s)) / 2.0, (6.0 - math.sin(s)) / 2.0])


@dataclass(frozen=True, eq=False)
class ConstantAnchor:
    """f(x) = value for all x; the degenerate contraction (modulus 0)."""

    value: np.ndarray
    lipschitz: ClassVar[float] = 0.0
    ism_modulus: ClassVar[None] = None

    def __post_init__(self):
        object.__setattr__(self, "value", as_vector(self.value, name="anchor"))
        self.value.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.value.size

    def __call__(self, x):
        return self.value


@dataclass(frozen=True, eq=False)
class LeastSquaresGradient:
    """A(x) = B^T (B x - b), the gradient of phi(x) = 0.5 ||B x - b||^2.

    Lipschitz constant L = lambda_max(B^T B); by the Baillon-Haddad theorem
    the gradient of a convex L-smooth function is (1/L)-cocoercive, so
    ``ism_modulus`` is always the derived 1/L, never user-supplied.
    """

    B: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 2 or B.size == 0:
            raise ValueError(f"B must be a nonempty 2-D matrix, got shape {B.shape}")
        if not np.isfinite(B).all():
            raise NonFiniteError("B contains NaN or Inf")
        b = as_vector(self.b, dim=B.shape[0], name="b")
        B.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_gram", B.T @ B)
        object.__setattr__(self, "_bt_b", B.T @ b)
        object.__setattr__(self, "lipschitz", ls_lipschitz(B))

    @property
    def dim(self) -> int:
        return self.B.shape[1]

    @property
    def ism_modulus(self) -> float:
        return 1.0 / self.lipschitz

    def __call__(self, x):
        return self._gram @ x - self._bt_b

    def objective(self, x) -> float:
        """phi(x) = 0.5 ||B x - b||^2."""
        r = self.B @ x - self.b
        return 0.5 * float(np.dot(r, r))


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x -> M x + c with Lipschitz bound ||M||_2."""

    M: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"M must be square, got shape {M.shape}")
        if not np.isfinite(M).all():
            raise NonFiniteError("M contains NaN or Inf")
        c = as_vector(self.c, dim=M.shape[0], name="c")
        M.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "lipschitz", float(np.linalg.norm(M, 2)))

    ism_modulus: ClassVar[None] = None

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def __call__(self, x):
        return self.M @ x + self.c


@dataclass(frozen=True)
class RegisteredMapping:
    """A user-supplied mapping with a declared role and modulus.

    The declared modulus is spot-checked on random pairs at registration;
    registration is refused on violation since every convergence guarantee
    hinges on it.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    dim: int
    role: str
    modulus: float

    @property
    def lipschitz(self):
        if self.role == "contraction":
            return self.modulus
        if self.role == "nonexpansive":
            return 1.0
        return None

    @property
    def ism_modulus(self):
        return self.modulus if self.role == "ism" else None

    def __call__(self, x):
        return self.fn(x)


_REGISTRY: dict[str, RegisteredMapping] = {}

_SPOT_CHECK_PAIRS = 1000
_SPOT_CHECK_TOL = 1e-10


def register_mapping(
    name: str,
    fn: Callable[[np.ndarray], np.ndarray],
    *,
    dim: int,
    role: str,
    modulus: float | None = None,
    seed: int = 20220702,
) -> RegisteredMapping:
    """Register ``fn`` under ``name`` after spot-checking its declared modulus.

    role="contraction" requires modulus in [0, 1); role="nonexpansive"
    defaults to modulus 1; role="ism" requires modulus > 0. The check draws
    1000 Gaussian pairs and refuses registration on any violation beyond
    1e-10.
    """
    if role not in ("contraction", "nonexpansive", "ism"):
        raise ValueError(f"unknown role {role!r}")
    if role == "nonexpansive" and modulus is None:
        modulus = 1.0
    if modulus is None:
        raise ValueError(f"role {role!r} needs an explicit modulus")
    modulus = float(modulus)
    if role == "contraction" and not (0 <= modulus < 1):
        raise ValueError(f"contraction modulus must be in [0, 1), got {modulus}")
    if role == "ism" and not modulus > 0:
        raise ValueError(f"ism modulus must be > 0, got {modulus}")
    if name in _REGISTRY:
        raise ValueError(f"mapping {name!r} already registered")

    rng = np.random.default_rng(seed)
    xs = rng.normal(scale=2.0, size=(_SPOT_CHECK_PAIRS, dim))
    ys = rng.normal(scale=2.0, size=(_SPOT_CHECK_PAIRS, dim))
    for x, y in zip(xs, ys):
        fx, fy = np.asarray(fn(x), dtype=float), np.asarray(fn(y), dtype=float)
        dxy = float(np.linalg.norm(x - y))
        dfxy = float(np.linalg.norm(fx - fy))
        if role in ("contraction", "nonexpansive"):
            bound = modulus if role == "contraction" else 1.0
            if dfxy > bound * dxy + _SPOT_CHECK_TOL:
                raise ValueError(
                    f"mapping {name!r} violates its declared {role} modulus "
                    f"{bound} ({dfxy:.6g} > {bound * dxy:.6g})"
                )
        else:
            lhs = float(np.dot(fx - fy, x - y))
            if lhs < modulus * dfxy**2 - _SPOT_CHECK_TOL:
                raise ValueError(
                    f"mapping {name!r} violates its declared ism modulus {modulus}"
                )
    entry = RegisteredMapping(name=name, fn=fn, dim=dim, role=role, modulus=modulus)
    _REGISTRY[name] = entry
    return entry


def get_mapping(name: str) -> RegisteredMapping:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownMappingError(name) from None


# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """The quadruple (Q, S, A, f) with its certified moduli.

    Q is a closed convex set, S a nonexpansive self-map of Q, A a cocoercive
    operator with modulus nu > 0, f a contraction with modulus rho < 1. The
    target set is the intersection of the fixed points of S with the
    solutions q of the variational inequality <Aq, x - q> >= 0 on Q;
    ``reference_set_omega`` names that intersection when it is known in
    closed form, enabling the independent reference solver.
    """

    set_Q: ConvexSet
    map_S: Callable
    map_A: Callable
    map_f: Callable
    reference_set_omega: ConvexSet | None = None

    def __post_init__(self):
        d = self.set_Q.dim
        for label, m in (("S", self.map_S), ("A", self.map_A), ("f", self.map_f)):
            mdim = getattr(m, "dim", d)
            if mdim != d:
                raise DimensionMismatchError(
                    f"map {label} has dimension {mdim}, set Q has {d}"
                )
        if self.reference_set_omega is not None and self.reference_set_omega.dim != d:
            raise DimensionMismatchError("reference set dimension differs from Q")
        rho = getattr(self.map_f, "lipschitz", None)
        if rho is None or not (0 <= rho < 1):
            raise ValueError(f"map_f must carry a contraction modulus in [0, 1), got {rho}")
        s_lip = getattr(self.map_S, "lipschitz", None)
        if s_lip is None or s_lip > 1:
            raise ValueError(f"map_S must carry a Lipschitz bound <= 1, got {s_lip}")
        nu = getattr(self.map_A, "ism_modulus", None)
        if nu is None or not nu > 0:
            raise ValueError(f"map_A must carry a cocoercivity modulus > 0, got {nu}")
        # spot-check that f and S map Q into Q
        pts = sample(self.set_Q, np.random.default_rng(12345), 32)
        for label, m in (("S", self.map_S), ("f", self.map_f)):
            for p in pts:
                if not contains(self.set_Q, np.asarray(m(p), dtype=float), 1e-8):
                    raise ValueError(f"map {label} does not map Q into Q (sampled point left Q)")

    @property
    def dim(self) -> int:
        return self.set_Q.dim

    @property
    def rho(self) -> float:
        return float(self.map_f.lipschitz)

    @property
    def sigma(self) -> float:
        """1 - rho, the contraction gap driving every rate below."""
        return 1.0 - self.rho

    @property
    def nu(self) -> float:
        return float(self.map_A.ism_modulus)


def apply(mapping, x) -> np.ndarray:
    """Evaluate ``mapping`` at ``x`` with boundary validation."""
    x = as_vector(x, dim=getattr(mapping, "dim", None), name="x")
    out = np.asarray(mapping(x), dtype=float)
    if not np.isfinite(out).all():
        raise NonFiniteError(f"mapping produced a non-finite value at {x!r}")
    return out


def _check_lambda(lam: float, nu: float | None, strict: bool, lo_open: bool = False):
    if nu is None:
        return
    bad = lam < 0 or lam > 2 * nu or (lo_open and lam == 0)
    if bad:
        msg = f"lambda = {lam} outside {'(' if lo_open else '['}0, 2*nu = {2 * nu}]"
        if strict:
            raise ScheduleViolationError(msg)
        warnings.warn(msg, ScheduleViolationWarning, stacklevel=3)


def forward_step(x, A, lam: float, *, strict: bool = False) -> np.ndarray:
    """x - lam * A(x); lam is expected in [0, 2*nu] (warns outside, raises if strict)."""
    _check_lambda(lam, getattr(A, "ism_modulus", None), strict)
    return x - lam * A(x)


def theta_map(x, problem: ProblemSpec, lam: float, *, strict: bool = False) -> np.ndarray:
    """P_Q(x - lam * A(x)); nonexpansive in x for lam in (0, 2*nu]."""
    _check_lambda(lam, problem.nu, strict, lo_open=True)
    return project(problem.set_Q, x - lam * problem.map_A(x))


def viscosity_map(x, problem: ProblemSpec, t: float, mu: float, *, strict: bool = False) -> np.ndarray:
    """t f(x) + (1 - t) S(P_Q(x - mu A(x))).

    Lipschitz with factor <= 1 - sigma * t where sigma = 1 - rho, hence a
    strict contraction for every t in (0, 1].
    """
    if not (0 < t <= 1):
        raise ParameterError(f"t must be in (0, 1], got {t}")
    _check_lambda(mu, problem.nu, strict)
    fx = problem.map_f(x)
    z = project(problem.set_Q, x - mu * problem.map_A(x))
    return t * fx + (1.0 - t) * problem.map_S(z)


def ls_lipschitz(B) -> float:
    """Largest eigenvalue of B^T B (squared spectral norm of B).

    This is the Lipschitz constant of x -> B^T(Bx - b); its reciprocal is the
    cocoercivity modulus of that gradient.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or not np.any(B != 0):
        raise ValueError("B must be a nonzero 2-D matrix")
    return float(np.linalg.eigvalsh(B.T @ B)[-1])
