"""Constructive convexity engine.

Three layers of machinery:

* the perturbation-size rule eps_R = beta/b(R+1) * f_a'(R)/f_a(R) (and its
  small-support and harmonic-interval refinements) with the worst-case
  Hessian margin it certifies for the perturbed ball complement;
* the strict-convexity margin of the sublevel-set certificate, split into
  its dominant positive term and the two controlled negative terms;
* the iterative exhaustion r_{n+1} = r_n + eps_{r_n} with per-interval
  step-count and angle bounds, whose accumulated angular defect must stay
  below a prescribed budget.

All ratios of comparison solutions are consumed from (log f, u), so
explosive profiles stay in range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import (
    DegenerateProfileError,
    DomainError,
    PreconditionError,
    RadialGeoError,
)
from .jacobi import JacobiSolution
from .profiles import CurvatureProfile
from .sc import ScParams

VARIANTS = ("unit-bump", "eps-bump", "harmonic-step")


def _x_coth_x(x: float) -> float:
    if x < 0:
        raise DomainError("coth argument must be nonnegative here")
    if x < 1e-8:
        return 1.0 + x * x / 3.0
    if x > 20.0:
        return x
    return x / math.tanh(x)


@dataclass(frozen=True)
class EpsilonRule:
    """Perturbation-size rule for the convex exhaustion.

    ``unit-bump`` uses a cutoff supported on a unit ball; ``eps-bump``
    shrinks the support to 2*eps; ``harmonic-step`` keeps the unit-bump
    size but books intervals of harmonic length in the construction.
    ``L_bump`` bounds the first two derivatives of the cutoff.
    """

    beta: float
    variant: str = "unit-bump"
    eps: Optional[float] = None
    L_bump: float = 4.0

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError("beta must be > 0")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}")
        if self.variant == "eps-bump" and (self.eps is None or self.eps <= 0):
            raise DomainError("eps-bump variant requires eps > 0")
        if self.L_bump <= 0:
            raise DomainError("L_bump must be > 0")


def _require_coverage(sol: JacobiSolution, t: float, what: str):
    if t > sol.t_max * (1 + 1e-12):
        raise PreconditionError(f"{what} needs solution coverage up to t={t}, "
                                f"have {sol.t_max}")


def epsilon_R(rule: EpsilonRule, profile: CurvatureProfile,
              sol_a: JacobiSolution, R: float) -> float:
    """Perturbation size at level R under the given rule; strictly positive."""
    if R < profile.r_star:
        raise PreconditionError(f"R={R} below profile threshold r_star={profile.r_star}")
    u = sol_a.u_at(R)
    if rule.variant == "eps-bump":
        e = rule.eps
        _require_coverage(sol_a, R, "epsilon_R")
        b2 = profile.b(R + 2.0 * e)
        if b2 <= 0:
            raise DegenerateProfileError(f"b(R+2*eps)=0 at R={R}")
        x = b2 * e
        val = rule.beta * u * min(e * e, e * e / _x_coth_x(x))
    else:
        b1 = profile.b(R + 1.0)
        if b1 <= 0:
            raise DegenerateProfileError(f"b(R+1)=0 at R={R}")
        val = rule.beta / b1 * u
    if val <= 0:
        raise DegenerateProfileError(f"epsilon_R degenerates to {val} at R={R}")
    return val


def betaL_margin(rule: EpsilonRule, profile: CurvatureProfile,
                 sol_a: JacobiSolution, R: float) -> float:
    """Worst-case Hessian lower bound for the perturbed ball complement.

    Positive value certifies strict convexity under the rule's beta; the
    value is affine in beta with negative slope, so the admissible beta
    threshold is its root.  Requires k = b(0) > 0.
    """
    k = profile.b(0.0)
    if k <= 0:
        raise DegenerateProfileError("margin needs b(0) > 0")
    u = sol_a.u_at(R)
    eps_r = epsilon_R(rule, profile, sol_a, R)
    L = rule.L_bump
    if rule.variant == "eps-bump":
        e = rule.eps
        b2 = profile.b(R + 2.0 * e)
        # (b2/e) * coth(b2*e) = (b2*e) coth(b2*e) / e^2
        bracket = u + _x_coth_x(b2 * e) / (e * e) + 1.0 / (e * e)
    else:
        b1 = profile.b(R + 1.0)
        bracket = u + b1 * (_x_coth_x(k / 2.0) / (k / 2.0)) + 1.0
    return u - eps_r * L * bracket


@dataclass(frozen=True)
class CertificateMargin:
    """Strict-convexity margin terms at evaluation radius rho, level R.

    All three terms carry a common factor rho^{-2} that is divided out, so
    they remain representable when rho itself does not fit in a double
    (the boundary regime (log rho)^alpha >= R lives at astronomical rho).
    The stored identity margin = dominant + hessian_h + bracket is exact.
    """

    R: float
    log_rho: float
    c4: float
    dominant: float
    hessian_h: float
    bracket: float
    mode: str  # "solver" or "asymptotic-bounds"

    @property
    def margin(self) -> float:
        return self.dominant + self.hessian_h + self.bracket

    def to_dict(self) -> dict:
        return {
            "R": self.R, "log_rho": self.log_rho, "c4": self.c4,
            "dominant": self.dominant, "hessian_h": self.hessian_h,
            "bracket": self.bracket, "margin": self.margin, "mode": self.mode,
        }


def certificate_margin(
    data,
    params: ScParams,
    sol_a: JacobiSolution,
    R: float,
    rho: Optional[float] = None,
    log_rho: Optional[float] = None,
    c4: float = 1.0,
) -> CertificateMargin:
    """Lower bound for the sublevel-set Hessian, term by term.

    With g(t) = (log t)^alpha the three terms are (after removing rho^{-2})

        dominant  =  R * alpha * (rho u(rho)) / (2 log rho)
        hessian_h = -c4 * (log rho)^alpha * (rho b(rho)) * rho / f_a(lam rho)
        bracket   = -c4^2 * (log rho)^{1+alpha} * (rho / f_a(lam rho))^2

    On the solved range the solver values are used; beyond it (the usual
    case, since the boundary regime needs (log rho)^alpha >= R) the growth
    lower bounds for f_a and u stand in, which keeps the total a genuine
    lower bound.  ``rho`` may be given directly or as ``log_rho``.
    """
    if (rho is None) == (log_rho is None):
        raise DomainError("give exactly one of rho, log_rho")
    if rho is not None:
        if rho <= math.e:
            raise DomainError(f"need rho > e, got {rho}")
        log_rho = math.log(rho)
    if log_rho <= 1.0:
        raise DomainError(f"need log rho > 1, got {log_rho}")
    if c4 < 0:
        raise DomainError("c4 must be nonnegative")
    alpha = params.alpha
    if log_rho**alpha < R:
        raise PreconditionError(
            f"(log rho)^alpha = {log_rho**alpha:.4g} < R = {R}: outside the "
            "boundary regime of the certificate"
        )

    lam = params.lam
    use_solver = rho is not None and rho <= sol_a.t_max and lam * rho >= 1e-3
    if use_solver:
        rho_u = rho * sol_a.u_at(rho)
        log_fa_lam = sol_a.log_f_at(lam * rho)
        rho_b = rho * data.profile.b(rho)
        mode = "solver"
    else:
        if data.profile.log_b_of_log_t is None:
            raise PreconditionError(
                "rho beyond the solved range needs a profile with a log-form "
                "lower-bound function (log_b_of_log_t)"
            )
        eps1 = params.eps1
        rho_u = 1.0 + (1.0 + eps1) / log_rho
        log_lam_rho = math.log(lam) + log_rho
        log_fa_lam = log_lam_rho + (1.0 + eps1) * math.log(log_lam_rho)
        rho_b = math.exp(data.profile.log_b_of_log_t(log_rho) + log_rho)
        mode = "asymptotic-bounds"

    log_rho_over_fa = log_rho - log_fa_lam
    dominant = R * alpha * rho_u / (2.0 * log_rho)
    hessian_h = -c4 * log_rho**alpha * rho_b * math.exp(log_rho_over_fa)
    bracket = -(c4 * c4) * log_rho ** (1.0 + alpha) * math.exp(2.0 * log_rho_over_fa)
    return CertificateMargin(
        R=R, log_rho=log_rho, c4=c4,
        dominant=dominant, hessian_h=hessian_h, bracket=bracket, mode=mode,
    )


# ---------------------------------------------------------------------------
# iterative exhaustion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalRow:
    n: int
    r_lo: float
    r_hi: float
    eps_top: float
    t_n_bound: float
    theta_n_bound: float
    product: float
    partial_sum: float
    realized_steps: int


@dataclass(frozen=True)
class ConstructionTrace:
    """Bookkeeping of the convex exhaustion run.

    ``steps`` holds the realized iteration (i, r_i, eps_i) with
    r_{i+1} = r_i + eps_i exactly; ``rows`` holds the per-interval bounds
    t_n (step count) and theta_n (angle), their product and the running
    angular defect.  ``converged`` is set once partial_sum plus a tail
    bound fits inside the budget.
    """

    r0: float
    alpha_budget: float
    c_angle: float
    variant: str
    rows: List[IntervalRow]
    steps: List[tuple]  # (i, r_i, eps_i)
    converged: bool
    status: str  # converged | budget-exceeded | inconclusive
    partial_sum: float
    tail_bound: float
    eps_nonincreasing: bool
    steps_truncated: bool

    def to_dict(self) -> dict:
        return {
            "r0": self.r0, "alpha_budget": self.alpha_budget,
            "c_angle": self.c_angle, "variant": self.variant,
            "converged": self.converged, "status": self.status,
            "sum": self.partial_sum, "tail_bound": self.tail_bound,
            "intervals": len(self.rows), "steps": len(self.steps),
            "eps_nonincreasing": self.eps_nonincreasing,
            "steps_truncated": self.steps_truncated,
        }

    def csv_rows(self):
        yield ("n", "r_lo", "r_hi", "eps_top", "t_n_bound", "theta_n_bound",
               "product", "partial_sum", "realized_steps")
        for r in self.rows:
            yield (r.n, repr(r.r_lo), repr(r.r_hi), repr(r.eps_top),
                   repr(r.t_n_bound), repr(r.theta_n_bound), repr(r.product),
                   repr(r.partial_sum), r.realized_steps)


def _interval_edge(variant: str, r0: float, n: int) -> float:
    """Lower edge of interval n: r0 + n for unit bookkeeping, r0 + H_n harmonic."""
    if variant == "harmonic-step":
        return r0 + sum(1.0 / i for i in range(1, n + 1))
    return r0 + float(n)


def run_construction(
    profile: CurvatureProfile,
    sol_a: JacobiSolution,
    rule: EpsilonRule,
    r0: float,
    alpha_budget: float,
    c_angle: float = 1.0,
    n_max: int = 200,
    max_steps: int = 100_000,
    record_steps: bool = True,
) -> ConstructionTrace:
    """Run the exhaustion from r0 and account the angular defect.

    Per interval the step count is bounded by 1/eps at the interval top
    (the realized steps, recorded while below ``max_steps``, never exceed
    it by more than one), and the angle per step by c_angle/f_a evaluated
    one unit below the interval (log-space).  The run converges once the
    partial sum plus a geometric tail bound fits below the budget; a
    partial sum already above the budget is a definite failure, and
    exhausting n_max without a decision is inconclusive, not an error.
    """
    if r0 < profile.r_star:
        raise PreconditionError(f"r0={r0} below r_star={profile.r_star}")
    if r0 <= 1.0:
        raise PreconditionError("r0 must exceed 1 (angle bound looks one unit back)")
    if not (0 < alpha_budget < math.pi / 2):
        raise PreconditionError(f"alpha_budget must lie in (0, pi/2), got {alpha_budget}")
    if c_angle <= 0:
        raise PreconditionError("c_angle must be > 0")
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")

    harmonic = rule.variant == "harmonic-step"
    rows: List[IntervalRow] = []
    steps: List[tuple] = []
    partial = 0.0
    products: List[float] = []
    r_i = r0
    i = 0
    eps_prev = None
    eps_nonincreasing = True
    steps_truncated = False
    converged = False
    status = "inconclusive"
    tail_bound = math.inf

    for n in range(n_max):
        lo = _interval_edge(rule.variant, r0, n)
        hi = _interval_edge(rule.variant, r0, n + 1)
        _require_coverage(sol_a, hi + (1.0 if rule.variant != "eps-bump" else 2.0 * rule.eps),
                          "construction")
        eps_top = epsilon_R(rule, profile, sol_a, hi)

        length = hi - lo
        if harmonic and n >= 1:
            t_bound = 1.0 / (n * eps_top)
        else:
            t_bound = length / eps_top if harmonic else 1.0 / eps_top

        if harmonic:
            log_theta = math.log(c_angle) - sol_a.log_f_at(hi)
        else:
            log_theta = math.log(c_angle) - sol_a.log_f_at(lo - 1.0)
        theta_bound = math.exp(log_theta) if log_theta < 709 else math.inf
        log_product = math.log(t_bound) + log_theta
        product = math.exp(log_product) if log_product < 709 else math.inf
        partial += product
        products.append(product)

        # realized stepping (bookkeeping only; the bounds above do not use it)
        realized = 0
        if record_steps and not steps_truncated:
            while r_i < hi:
                if len(steps) >= max_steps:
                    steps_truncated = True
                    break
                eps_i = epsilon_R(rule, profile, sol_a, r_i)
                steps.append((i, r_i, eps_i))
                if eps_prev is not None and eps_i > eps_prev * (1 + 1e-12):
                    eps_nonincreasing = False
                eps_prev = eps_i
                r_i += eps_i
                i += 1
                realized += 1

        rows.append(IntervalRow(
            n=n, r_lo=lo, r_hi=hi, eps_top=eps_top, t_n_bound=t_bound,
            theta_n_bound=theta_bound, product=product, partial_sum=partial,
            realized_steps=realized,
        ))

        if partial > alpha_budget:
            status = "budget-exceeded"
            tail_bound = math.inf
            break

        if len(products) >= 3:
            ratios = [products[-m] / products[-m - 1] for m in (1, 2)
                      if products[-m - 1] > 0]
            # decay ratios can still creep toward their limit, so pad the
            # observed maximum before trusting the geometric tail
            q = 1.05 * max(ratios) if ratios else math.inf
            if 0 <= q < 0.95 and products[-1] > 0:
                tail = products[-1] * q / (1.0 - q)
                if partial + tail <= alpha_budget:
                    converged = True
                    status = "converged"
                    tail_bound = tail
                    break
        if products[-1] == 0.0 and partial <= alpha_budget:
            converged = True
            status = "converged"
            tail_bound = 0.0
            break

    return ConstructionTrace(
        r0=r0, alpha_budget=alpha_budget, c_angle=c_angle, variant=rule.variant,
        rows=rows, steps=steps, converged=converged, status=status,
        partial_sum=partial, tail_bound=tail_bound,
        eps_nonincreasing=eps_nonincreasing, steps_truncated=steps_truncated,
    )


def find_r0(
    profile: CurvatureProfile,
    sol_a: JacobiSolution,
    rule: EpsilonRule,
    alpha_budget: float,
    c_angle: float = 1.0,
    r0_min: Optional[float] = None,
    r0_max: Optional[float] = None,
    step: float = 0.25,
    n_max: int = 200,
) -> float:
    """Least grid r0 (spacing ``step``) whose construction trace converges.

    Scans upward, so the returned value is minimal on the grid; raises
    when no candidate on the grid converges.
    """
    if not (0 < alpha_budget < math.pi / 2):
        raise PreconditionError(f"alpha_budget must lie in (0, pi/2), got {alpha_budget}")
    lo = max(profile.r_star, 1.0 + step) if r0_min is None else r0_min
    hi = sol_a.t_max - 5.0 if r0_max is None else r0_max
    if hi <= lo:
        raise PreconditionError("empty r0 search range")
    candidates = np.arange(lo, hi, step)
    for r0 in candidates:
        trace = run_construction(
            profile, sol_a, rule, float(r0), alpha_budget, c_angle,
            n_max=n_max, record_steps=False,
        )
        if trace.converged:
            return float(r0)
    raise RadialGeoError(
        f"no r0 in [{lo}, {hi}] (step {step}) yields a converged trace"
    )
