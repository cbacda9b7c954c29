"""Overflow-safe solver for the Jacobi initial value problem.

For a nonnegative radial function k the comparison solution f_k solves

    f(0) = 0,  f'(0) = 1,  f'' = k(t)^2 f.

Solutions grow roughly like exp(integral of k) and overflow doubles early
(for k built on sinh(sinh t) already near t ~ 7), so nothing here ever
stores f itself.  The state is the logarithmic derivative u = f'/f, which
solves the Riccati equation u' = k^2 - u^2 with u ~ 1/t at the origin,
together with log f = integral of u.  Ratios f(s)/f(t) and f'(t)/f(t) are
exact functions of (log f, u) and never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import DomainError, HypothesisError, IntegrationFailure, RadialGeoError
from .profiles import CurvatureProfile, RadialFunction, default_grid

# below this radius the series start u = 1/t + k(0)^2 t/3 is used
SERIES_T0 = 1e-3


@dataclass(frozen=True)
class JacobiSolution:
    """Solution of the Jacobi IVP in (log f, u) form on [0, t_max]."""

    t_grid: np.ndarray
    log_f: np.ndarray
    u: np.ndarray
    k_profile: RadialFunction
    rtol: float
    k0: float
    _dense: object = None

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    def _check_range(self, t: float):
        if t < 0 or t > self.t_max * (1 + 1e-12):
            raise DomainError(f"t={t} outside solved range [0, {self.t_max}]")

    def u_at(self, t: float) -> float:
        """Logarithmic derivative f'/f at t (blows up like 1/t at 0)."""
        t = float(t)
        self._check_range(t)
        if t <= 0:
            raise DomainError("u is singular at t=0")
        if t < SERIES_T0:
            return 1.0 / t + self.k0**2 * t / 3.0
        return float(self._dense(t)[0])

    def log_f_at(self, t: float) -> float:
        """log f(t); -inf at t=0."""
        t = float(t)
        self._check_range(t)
        if t == 0.0:
            return -math.inf
        if t < SERIES_T0:
            return math.log(t) + math.log1p(self.k0**2 * t * t / 6.0)
        return float(self._dense(t)[1])

    def f_at(self, t: float) -> float:
        """f(t) where representable in a double; inf past ~log f = 709."""
        if float(t) == 0.0:
            return 0.0
        lf = self.log_f_at(t)
        return math.exp(lf) if lf < 709.0 else math.inf

    def fprime_at(self, t: float) -> float:
        t = float(t)
        if t == 0.0:
            return 1.0
        lf = self.log_f_at(t) + math.log(self.u_at(t))
        return math.exp(lf) if lf < 709.0 else math.inf

    def log_ratio(self, s: float, t: float) -> float:
        """log(f(s)/f(t)), overflow-free."""
        return self.log_f_at(s) - self.log_f_at(t)

    def ratio(self, s: float, t: float) -> float:
        return math.exp(self.log_ratio(s, t))

    def csv_rows(self):
        yield ("t", "log_f", "u")
        for t, lf, uu in zip(self.t_grid, self.log_f, self.u):
            yield (repr(float(t)), repr(float(lf)), repr(float(uu)))


def solve_jacobi(k: RadialFunction, t_max: float, rtol: float = 1e-10) -> JacobiSolution:
    """Integrate the Riccati form of the Jacobi IVP up to t_max.

    The origin is handled by the series u = 1/t + k(0)^2 t/3 + O(t^3) on
    [0, 1e-3]; from there an adaptive stiffness-switching integrator carries
    (u, log f) with relative tolerance ``rtol``.
    """
    if not (0 < rtol <= 1e-2):
        raise DomainError(f"rtol must be in (0, 1e-2], got {rtol}")
    if t_max <= SERIES_T0:
        raise DomainError(f"t_max must exceed {SERIES_T0}")

    sample = np.linspace(0.0, min(t_max, 1e6), 101)
    sample = np.concatenate([sample, default_grid(max(SERIES_T0, 1e-3), t_max, 16)])
    for t in sample:
        if k(min(t, t_max)) < 0:
            raise DomainError(f"k must be nonnegative; k({t}) < 0")

    k0 = k(0.0)
    t0 = SERIES_T0
    u0 = 1.0 / t0 + k0 * k0 * t0 / 3.0
    lf0 = math.log(t0) + math.log1p(k0 * k0 * t0 * t0 / 6.0)

    def rhs(t, y):
        kk = k(t)
        return (kk * kk - y[0] * y[0], y[0])

    sol = solve_ivp(
        rhs, (t0, t_max), (u0, lf0), method="LSODA",
        rtol=rtol, atol=(1e-14, 1e-14), dense_output=True,
    )
    if not sol.success:
        raise IntegrationFailure(
            f"integration stalled at t={sol.t[-1]}: {sol.message}", last_t=float(sol.t[-1])
        )

    grid = default_grid(t0, t_max, per_decade=64)
    vals = sol.sol(grid)
    return JacobiSolution(
        t_grid=grid, u=vals[0], log_f=vals[1],
        k_profile=k, rtol=rtol, k0=k0, _dense=sol.sol,
    )


# ---------------------------------------------------------------------------
# growth estimates for pinched curvature upper bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JacestReport:
    """Pointwise check of f >= t (log t)^{1+eps1} and u >= 1/t + (1+eps1)/(t log t)."""

    passed: bool
    r1: Optional[float]
    r1_fprime: Optional[float]
    grid: np.ndarray
    slack_log_f: np.ndarray
    slack_u: np.ndarray
    slack_log_fprime: np.ndarray

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "r1": self.r1,
            "r1_fprime": self.r1_fprime,
            "window": [float(self.grid[0]), float(self.grid[-1])],
            "min_slack_log_f": float(self.slack_log_f.min()),
            "min_slack_u": float(self.slack_u.min()),
        }


def _least_stable_index(ok: np.ndarray) -> Optional[int]:
    """First index from which the boolean array stays True."""
    if not ok[-1]:
        return None
    bad = np.nonzero(~ok)[0]
    return 0 if bad.size == 0 else int(bad[-1]) + 1


def jacest_check(sol: JacobiSolution, eps: float, eps1: float, t_range) -> JacestReport:
    """Locate the least radius past which both growth lower bounds hold.

    Requires 0 < eps1 < eps and a window above e (so log log is defined).
    Also reports the companion derivative bound
    f' >= (log t)^{1+eps1} + (1+eps1)(log t)^{eps1}, which shares the
    same threshold radius in practice.
    """
    if not (0 < eps1 < eps):
        raise DomainError(f"need 0 < eps1 < eps, got eps1={eps1}, eps={eps}")
    t_lo, t_hi = float(t_range[0]), float(t_range[1])
    if t_lo <= math.e:
        raise DomainError(f"window must start above e, got {t_lo}")
    if t_hi > sol.t_max * (1 + 1e-12):
        raise DomainError(f"window end {t_hi} beyond solved range {sol.t_max}")

    grid = default_grid(t_lo, t_hi)
    logt = np.log(grid)
    log_f = np.array([sol.log_f_at(t) for t in grid])
    u = np.array([sol.u_at(t) for t in grid])

    slack_f = log_f - (logt + (1.0 + eps1) * np.log(logt))
    slack_u = u - (1.0 / grid + (1.0 + eps1) / (grid * logt))
    slack_fp = (log_f + np.log(u)) - np.log(
        logt ** (1.0 + eps1) + (1.0 + eps1) * logt**eps1
    )

    ok = (slack_f >= 0) & (slack_u >= 0)
    i1 = _least_stable_index(ok)
    ifp = _least_stable_index(slack_fp >= 0)
    return JacestReport(
        passed=i1 is not None,
        r1=(float(grid[i1]) if i1 is not None else None),
        r1_fprime=(float(grid[ifp]) if ifp is not None else None),
        grid=grid, slack_log_f=slack_f, slack_u=slack_u, slack_log_fprime=slack_fp,
    )


# ---------------------------------------------------------------------------
# integral pinching bound for comparison solution ratios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonBound:
    """Integral I of (b^2-a^2)/b and the ratio bound exp((pi/2) I)."""

    integral_I: float
    c_bound: float


@dataclass(frozen=True)
class ImplemmaReport:
    bound: ComparisonBound
    max_log_ratio_gap: float
    max_violation: float
    passed: bool
    grid: np.ndarray

    def to_dict(self) -> dict:
        return {
            "I": self.bound.integral_I,
            "c_bound": self.bound.c_bound,
            "max_violation": self.max_violation,
            "passed": self.passed,
        }


def _verified_nondecreasing(f: RadialFunction, grid, name: str):
    vals = f.map(grid)
    if np.any(np.diff(vals) < -1e-12 * np.maximum(np.abs(vals[:-1]), 1.0)):
        raise HypothesisError(f"{name} must be non-decreasing for the ratio bound")


def implemma_check(
    profile: CurvatureProfile,
    t_max: float,
    rtol: float = 1e-10,
    tail_bound: float = 0.0,
    slack: float = 1e-6,
) -> ImplemmaReport:
    """Quadrature the pinching integral and verify the ratio bound it implies.

    ``tail_bound`` must be a caller-supplied upper bound for the integral
    over [t_max, inf); it is an error to omit it when the integrand has not
    decayed at t_max, since guessing tails would make the check meaningless.
    Verifies log f_b - log f_a <= (pi/2) I + slack on a geometric grid.
    """
    a, b = profile.a, profile.b
    grid = np.concatenate([[0.0], default_grid(SERIES_T0, t_max)])
    _verified_nondecreasing(a, grid, "a")
    _verified_nondecreasing(b, grid, "b")
    profile.check_ordering(grid[grid >= profile.r_star])

    def integrand(t: float) -> float:
        bv = b(t)
        if bv == 0.0:
            return 0.0
        av = a(t)
        return (bv * bv - av * av) / bv

    integral, quad_err = quad(integrand, 0.0, t_max, epsabs=1e-13, epsrel=1e-11, limit=400)
    if tail_bound < 0:
        raise DomainError("tail_bound must be nonnegative")
    tail_now = integrand(t_max)
    if tail_now > 1e-10 * max(1.0, integral) and tail_bound == 0.0:
        raise RadialGeoError(
            f"integrand has not decayed at t_max={t_max} "
            f"(value {tail_now:.3e}); supply an explicit tail_bound majorant"
        )
    total = integral + tail_bound
    bound = ComparisonBound(integral_I=total, c_bound=math.exp(math.pi / 2.0 * total))

    sol_a = solve_jacobi(a, t_max, rtol=rtol)
    sol_b = solve_jacobi(b, t_max, rtol=rtol)
    tgrid = default_grid(SERIES_T0 * 10, t_max)
    gap = np.array([sol_b.log_f_at(t) - sol_a.log_f_at(t) for t in tgrid])
    limit = math.pi / 2.0 * total
    violation = float(np.max(gap - limit))
    return ImplemmaReport(
        bound=bound,
        max_log_ratio_gap=float(gap.max()),
        max_violation=violation,
        passed=bool(violation <= slack),
        grid=tgrid,
    )


def log_lower_cosh_bound(sol: JacobiSolution, t: float, s: float) -> float:
    """log of the comparison lower bound f(t) cosh(k(t)(s-t)) for f(s)."""
    if s < t:
        raise DomainError(f"need s >= t, got s={s} < t={t}")
    if t < 0:
        raise DomainError("need t >= 0")
    kt = sol.k_profile(t)
    x = kt * (s - t)
    # log cosh x, overflow-safe
    log_cosh = abs(x) + math.log1p(math.exp(-2.0 * abs(x))) - math.log(2.0)
    return sol.log_f_at(t) + log_cosh


def lower_cosh_bound(sol: JacobiSolution, t: float, s: float) -> float:
    """Comparison lower bound f(t) cosh(k(t)(s-t)); inf if unrepresentable."""
    lv = log_lower_cosh_bound(sol, t, s)
    return math.exp(lv) if lv < 709.0 else math.inf
