"""Radial curvature-bound profiles and the model catalog.

A profile is a pair (a, b) of nonnegative radial functions bounding the
sectional curvature between -b(t)^2 and -a(t)^2 at distance t from a base
point, valid beyond a threshold radius r_star.  The catalog provides the
closed-form pairs used throughout the toolkit (constant curvature, the
log-pinched pair, the super-exponential pair built on sinh(sinh t), flat
space) plus grid-sampled custom profiles.

Closed forms that blow up or vanish near t = 0 are continued into the core
by a constant: the formula is used beyond the radius where it crosses the
``core`` level and frozen at that level below.  This only affects finite
prefactors of the associated comparison solutions, never their asymptotics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import ConstraintViolation, DomainError, RadialGeoError

E_CUBED = math.exp(3.0)


def default_grid(t_min: float, t_max: float, per_decade: int = 64) -> np.ndarray:
    """Geometric grid with a fixed number of points per decade."""
    if t_min <= 0 or t_max <= t_min:
        raise DomainError(f"need 0 < t_min < t_max, got [{t_min}, {t_max}]")
    n = max(2, int(math.ceil(per_decade * math.log10(t_max / t_min))) + 1)
    return np.geomspace(t_min, t_max, n)


@dataclass(frozen=True)
class RadialFunction:
    """Scalar function of geodesic distance t >= 0 with optional derivative.

    ``monotonicity`` is a declaration ('increasing' means non-decreasing,
    'decreasing' non-increasing, 'none' unknown); checks that rely on it
    verify it on their grids rather than trusting the tag blindly.
    """

    fn: Callable[[float], float]
    dfn: Optional[Callable[[float], float]] = None
    monotonicity: str = "none"
    kind: str = "analytic"
    t_min: float = 0.0
    t_max: float = math.inf
    label: str = ""

    def __post_init__(self):
        if self.monotonicity not in ("increasing", "decreasing", "none"):
            raise ConstraintViolation(
                f"monotonicity must be increasing/decreasing/none, got {self.monotonicity!r}"
            )

    def __call__(self, t: float) -> float:
        t = float(t)
        if not (self.t_min <= t <= self.t_max):
            raise DomainError(
                f"{self.label or 'radial function'}: t={t} outside domain "
                f"[{self.t_min}, {self.t_max}]"
            )
        v = float(self.fn(t))
        if not math.isfinite(v):
            raise DomainError(f"{self.label or 'radial function'}: non-finite value at t={t}")
        return v

    def deriv(self, t: float) -> float:
        if self.dfn is None:
            raise RadialGeoError(f"{self.label or 'radial function'} has no derivative")
        t = float(t)
        if not (self.t_min <= t <= self.t_max):
            raise DomainError(f"t={t} outside domain [{self.t_min}, {self.t_max}]")
        return float(self.dfn(t))

    @property
    def has_deriv(self) -> bool:
        return self.dfn is not None

    def map(self, grid) -> np.ndarray:
        return np.array([self(t) for t in np.asarray(grid, dtype=float)])

    @staticmethod
    def from_grid(t, values, monotonicity: str = "none", label: str = "") -> "RadialFunction":
        """Monotone cubic (PCHIP) interpolant of sampled values.

        Evaluation outside [t[0], t[-1]] raises instead of extrapolating.
        """
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.size < 2 or t.shape != values.shape:
            raise ConstraintViolation("grid function needs matching 1-d arrays, len >= 2")
        if np.any(np.diff(t) <= 0):
            raise ConstraintViolation("grid abscissae must be strictly increasing")
        interp = PchipInterpolator(t, values, extrapolate=False)
        dinterp = interp.derivative()

        def fn(x, _i=interp):
            y = _i(x)
            if np.any(np.isnan(y)):
                raise DomainError(f"t={x} outside sampled grid [{t[0]}, {t[-1]}]")
            return float(y)

        def dfn(x, _d=dinterp):
            y = _d(x)
            if np.any(np.isnan(y)):
                raise DomainError(f"t={x} outside sampled grid [{t[0]}, {t[-1]}]")
            return float(y)

        return RadialFunction(
            fn=fn, dfn=dfn, monotonicity=monotonicity, kind="grid",
            t_min=float(t[0]), t_max=float(t[-1]), label=label,
        )


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature bound pair: -b(t)^2 <= K <= -a(t)^2 for t >= r_star."""

    a: RadialFunction
    b: RadialFunction
    r_star: float = 0.0
    model: Optional[str] = None
    params: dict = field(default_factory=dict)
    # log b as a function of x = log t, for regimes where t itself overflows
    log_b_of_log_t: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.r_star < 0:
            raise ConstraintViolation("r_star must be >= 0")

    def check_ordering(self, grid) -> float:
        """Verify b >= a >= 0 on grid points beyond r_star; return min slack."""
        grid = np.asarray(grid, dtype=float)
        grid = grid[grid >= self.r_star]
        if grid.size == 0:
            raise DomainError("no grid points at or beyond r_star")
        av = self.a.map(grid)
        bv = self.b.map(grid)
        if np.any(av < 0):
            raise ConstraintViolation("a must be nonnegative beyond r_star")
        slack = bv - av
        if np.any(slack < 0):
            t_bad = float(grid[np.argmin(slack)])
            raise ConstraintViolation(f"b >= a violated at t={t_bad}")
        return float(slack.min())


@dataclass(frozen=True)
class DataC:
    """Profile plus the constants entering the growth conditions (C1)-(C4)."""

    profile: CurvatureProfile
    t1: float
    eps: float
    eps_tilde: float
    c1: float = 1.0
    dim: int = 2

    def __post_init__(self):
        if not (self.eps > self.eps_tilde > 0):
            raise ConstraintViolation("need eps > eps_tilde > 0")
        if self.c1 < 1:
            raise ConstraintViolation("need c1 >= 1")
        if self.dim < 2:
            raise ConstraintViolation("need dim >= 2")
        if self.t1 <= 1.0:
            raise ConstraintViolation("need t1 > 1 (logarithmic conditions)")


@dataclass(frozen=True)
class ConeSpec:
    """Truncated cone around a boundary direction, aperture 1/L."""

    L: float
    v0_angle: float = 0.0
    multiplier: int = 1

    def __post_init__(self):
        if self.L <= 8.0 / math.pi:
            raise ConstraintViolation(f"need L > 8/pi ~= {8/math.pi:.5f}, got {self.L}")
        if self.multiplier < 1:
            raise ConstraintViolation("multiplier must be a positive integer")

    @property
    def aperture(self) -> float:
        return self.multiplier / self.L


# ---------------------------------------------------------------------------
# catalog closed forms
# ---------------------------------------------------------------------------

def _const_fn(value: float) -> Callable[[float], float]:
    return lambda t: value


def _clamped(formula: Callable[[float], float], t_cross: float, level: float):
    """Formula beyond t_cross, constant ``level`` below (continuous join)."""

    def fn(t: float) -> float:
        return level if t <= t_cross else formula(t)

    return fn


def _log_pinched(eps: float, eps_tilde: float, r_star: float, core: float) -> CurvatureProfile:
    if eps <= eps_tilde:
        raise ConstraintViolation("log-pinched requires eps > eps_tilde")
    if eps_tilde <= 0:
        raise ConstraintViolation("log-pinched requires eps_tilde > 0")
    if core <= 0:
        raise ConstraintViolation("log-pinched requires core > 0")
    if r_star <= math.e:
        raise ConstraintViolation("log-pinched requires r_star > e")

    def a_formula(t: float) -> float:
        return math.sqrt((1.0 + eps) / (t * t * math.log(t)))

    def a_formula_d(t: float) -> float:
        # d/dt sqrt((1+eps)/(t^2 log t)) = -a * (2 log t + 1) / (2 t log t)
        return -a_formula(t) * (2.0 * math.log(t) + 1.0) / (2.0 * t * math.log(t))

    # crossover where the formula reaches the core level (formula decreases
    # from +inf at t=1+ to 0, so the root is unique)
    t_a = brentq(lambda t: a_formula(t) - core, 1.0 + 1e-12, 1e12, xtol=1e-14, rtol=1e-15)

    def b_formula(t: float) -> float:
        return math.log(t) ** eps_tilde / t

    def b_formula_d(t: float) -> float:
        lt = math.log(t)
        return lt ** (eps_tilde - 1.0) * (eps_tilde - lt) / (t * t)

    # b peaks at t = exp(eps_tilde); freeze at the peak value below it so the
    # profile is monotone non-increasing on all of [0, inf)
    t_b = math.exp(eps_tilde)
    b_peak = b_formula(t_b)

    a = RadialFunction(
        fn=_clamped(a_formula, t_a, core),
        dfn=lambda t: 0.0 if t <= t_a else a_formula_d(t),
        monotonicity="decreasing", label="log-pinched a",
    )
    b = RadialFunction(
        fn=_clamped(b_formula, t_b, b_peak),
        dfn=lambda t: 0.0 if t <= t_b else b_formula_d(t),
        monotonicity="decreasing", label="log-pinched b",
    )

    def log_b(x: float) -> float:
        # log b(t) with x = log t, valid in the tail x > log r_star
        if x <= 0:
            raise DomainError("log_b needs log t > 0")
        return eps_tilde * math.log(x) - x

    return CurvatureProfile(
        a=a, b=b, r_star=r_star, model="log-pinched",
        params={"eps": eps, "eps_tilde": eps_tilde, "r_star": r_star, "core": core},
        log_b_of_log_t=log_b,
    )


def _x_coth_x(x: float) -> float:
    """x*coth(x), continuous through 0; tends to 1."""
    if abs(x) < 1e-8:
        return 1.0 + x * x / 3.0
    if abs(x) > 20.0:
        return abs(x)
    return x / math.tanh(x)


def sinh_iterate_curvature(t: float, m: int = 2) -> float:
    """Squared curvature bound a^2 = f''/f for f the m-th iterate of sinh.

    For m=1 this is the constant 1; for m=2 it equals
    sinh(t)*coth(sinh(t)) + cosh(t)^2.
    """
    if m == 1:
        return 1.0
    if m == 2:
        s = math.sinh(t)
        return _x_coth_x(s) + math.cosh(t) ** 2
    raise ConstraintViolation("sinh-iterate supports m in {1, 2} (higher iterates overflow)")


def _sinh_iterate_curvature_d(t: float) -> float:
    # derivative of a^2 = sinh t coth(sinh t) + cosh^2 t, divided out later
    s = math.sinh(t)
    c = math.cosh(t)
    if abs(s) < 1e-4:
        bracket = 2.0 * s / 3.0
    elif s > 20.0:
        bracket = 1.0
    else:
        bracket = 1.0 / math.tanh(s) - s / math.sinh(s) ** 2
    return c * bracket + 2.0 * c * s


def _superexp(c: float, eps: float, r_star: float) -> CurvatureProfile:
    if c <= 0:
        raise ConstraintViolation("superexp requires c > 0")
    if not (0 < eps < 2):
        raise ConstraintViolation("superexp requires 0 < eps < 2")

    def a_fn(t: float) -> float:
        return math.sqrt(sinh_iterate_curvature(t, 2))

    def a_dfn(t: float) -> float:
        return _sinh_iterate_curvature_d(t) / (2.0 * a_fn(t))

    def log_b(t: float) -> float:
        return 0.5 * math.log(c) + (1.0 - eps / 2.0) * t + 0.5 * math.exp(t / E_CUBED)

    def b_fn(t: float) -> float:
        return math.exp(log_b(t))

    def b_dfn(t: float) -> float:
        return b_fn(t) * ((1.0 - eps / 2.0) + math.exp(t / E_CUBED) / (2.0 * E_CUBED))

    # representable ranges: a ~ cosh t overflows near t = 355, the doubly
    # exponential b already near t = 142
    a = RadialFunction(fn=a_fn, dfn=a_dfn, monotonicity="increasing",
                       t_max=350.0, label="superexp a")
    b = RadialFunction(fn=b_fn, dfn=b_dfn, monotonicity="increasing",
                       t_max=140.0, label="superexp b")
    return CurvatureProfile(
        a=a, b=b, r_star=r_star, model="superexp",
        params={"c": c, "eps": eps, "r_star": r_star},
        log_b_of_log_t=None,
    )


def catalog_lookup(name: str, **params) -> CurvatureProfile:
    """Build a catalog profile from its name and parameters.

    Known names: constant, euclidean, log-pinched, superexp, sinh-iterate,
    custom-grid.  Parameter constraints are enforced and named on violation.
    """
    if name == "constant":
        k = float(params.get("k", 1.0))
        if k <= 0:
            raise ConstraintViolation("constant model requires k > 0")
        rf = lambda: RadialFunction(fn=_const_fn(k), dfn=_const_fn(0.0),
                                    monotonicity="increasing", label=f"constant {k}")
        return CurvatureProfile(a=rf(), b=rf(), r_star=float(params.get("r_star", 0.0)),
                                model="constant", params={"k": k},
                                log_b_of_log_t=lambda x: math.log(k))

    if name == "euclidean":
        rf = lambda: RadialFunction(fn=_const_fn(0.0), dfn=_const_fn(0.0),
                                    monotonicity="increasing", label="euclidean")
        return CurvatureProfile(a=rf(), b=rf(), r_star=0.0, model="euclidean", params={})

    if name == "log-pinched":
        return _log_pinched(
            eps=float(params.get("eps", 1.0)),
            eps_tilde=float(params.get("eps_tilde", 0.5)),
            r_star=float(params.get("r_star", 10.0)),
            core=float(params.get("core", 2.0)),
        )

    if name == "superexp":
        return _superexp(
            c=float(params.get("c", 1.0)),
            eps=float(params.get("eps", 0.1)),
            r_star=float(params.get("r_star", 1.0)),
        )

    if name == "sinh-iterate":
        m = int(params.get("m", 2))
        sinh_iterate_curvature(0.0, m)  # raises for unsupported m
        a = RadialFunction(
            fn=lambda t: math.sqrt(sinh_iterate_curvature(t, m)),
            dfn=(_const_fn(0.0) if m == 1
                 else lambda t: _sinh_iterate_curvature_d(t)
                 / (2.0 * math.sqrt(sinh_iterate_curvature(t, 2)))),
            monotonicity="increasing", t_max=700.0, label=f"sinh-iterate {m}",
        )
        return CurvatureProfile(a=a, b=a, r_star=float(params.get("r_star", 0.0)),
                                model="sinh-iterate", params={"m": m})

    if name == "custom-grid":
        t = params.get("t")
        av = params.get("a")
        bv = params.get("b")
        if t is None or av is None or bv is None:
            raise ConstraintViolation("custom-grid requires t, a, b arrays")
        a = RadialFunction.from_grid(t, av, monotonicity=params.get("a_monotonicity", "none"),
                                     label="custom a")
        b = RadialFunction.from_grid(t, bv, monotonicity=params.get("b_monotonicity", "none"),
                                     label="custom b")
        return CurvatureProfile(a=a, b=b, r_star=float(params.get("r_star", float(np.asarray(t)[0]))),
                                model="custom-grid",
                                params={"t": list(map(float, t)), "a": list(map(float, av)),
                                        "b": list(map(float, bv))})

    raise ConstraintViolation(f"unknown model name {name!r}")


# ---------------------------------------------------------------------------
# growth conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    min_slack: float
    argmin_t: float
    first_violation_t: Optional[float]


@dataclass(frozen=True)
class CConditionReport:
    checks: dict
    grid_min: float
    grid_max: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "grid": [self.grid_min, self.grid_max],
            "conditions": {
                k: {
                    "passed": c.passed,
                    "min_slack": c.min_slack,
                    "argmin_t": c.argmin_t,
                    "first_violation_t": c.first_violation_t,
                }
                for k, c in self.checks.items()
            },
        }


def _condition(name, grid, slack, scale) -> ConditionCheck:
    """Pass when slack >= 0 up to a relative roundoff allowance.

    Equality cases (model pairs saturating a bound) must not flip to fail
    on the last ulp, so violations smaller than 1e-12 * scale are ignored.
    """
    slack = np.asarray(slack, dtype=float)
    scale = np.maximum(np.asarray(scale, dtype=float), 1e-300)
    rel = slack / scale
    i = int(np.argmin(rel))
    bad = np.nonzero(rel < -1e-12)[0]
    return ConditionCheck(
        name=name,
        passed=bool(bad.size == 0),
        min_slack=float(slack[i]),
        argmin_t=float(grid[i]),
        first_violation_t=(float(grid[bad[0]]) if bad.size else None),
    )


def check_c_conditions(data: DataC, grid) -> CConditionReport:
    """Evaluate the four growth conditions on a grid of radii >= t1.

    Slacks are (lhs - rhs) oriented so nonnegative means the condition
    holds; the reported infimum lets the caller judge how much asymptotic
    headroom a finite window actually shows.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("empty grid")
    if np.any(grid < data.t1):
        raise DomainError(f"grid points below t1={data.t1}")
    if np.any(grid <= 1.0):
        raise DomainError("grid points must exceed 1 (log t > 0)")

    prof = data.profile
    av = prof.a.map(grid)
    bv = prof.b.map(grid)
    logt = np.log(grid)

    c1_rhs = (1.0 + data.eps) / (grid**2 * logt)
    c2_rhs = logt ** (2.0 * data.eps_tilde) / grid**2
    b_plus = prof.b.map(grid + 1.0)
    b_half = prof.b.map(grid / 2.0)

    checks = {
        "C1": _condition("C1", grid, av**2 - c1_rhs, np.maximum(av**2, c1_rhs)),
        "C2": _condition("C2", grid, bv**2 - c2_rhs, np.maximum(bv**2, c2_rhs)),
        "C3": _condition("C3", grid, data.c1 * bv - b_plus, np.maximum(data.c1 * bv, b_plus)),
        "C4": _condition("C4", grid, data.c1 * bv - b_half, np.maximum(data.c1 * bv, b_half)),
    }
    return CConditionReport(checks=checks, grid_min=float(grid[0]), grid_max=float(grid[-1]))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def profile_to_json(profile: CurvatureProfile) -> str:
    if profile.model == "custom-grid":
        obj = {"grid": {"t": profile.params["t"], "a": profile.params["a"],
                        "b": profile.params["b"]}, "r_star": profile.r_star}
    elif profile.model is not None:
        obj = {"model": profile.model, "params": profile.params, "r_star": profile.r_star}
    else:
        raise RadialGeoError("profile has no serializable model description")
    return json.dumps(obj, sort_keys=True)


def profile_from_json(text: str) -> CurvatureProfile:
    obj = json.loads(text)
    if "grid" in obj:
        g = obj["grid"]
        return catalog_lookup("custom-grid", t=g["t"], a=g["a"], b=g["b"],
                              r_star=obj.get("r_star", g["t"][0]))
    if "model" not in obj:
        raise ConstraintViolation("profile JSON needs 'model' or 'grid'")
    params = dict(obj.get("params", {}))
    if "r_star" in obj:
        params.setdefault("r_star", obj["r_star"])
    return catalog_lookup(obj["model"], **params)
