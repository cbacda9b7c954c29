"""Strict-convexity gate: decides which pinching alternative certifies
convexity at infinity for a curvature profile.

Two alternatives are checked.  Branch 1 brackets the curvature lower-bound
root b between (log t)^{~eps_tilde}/t and a ratio of the comparison solution
f_a and its derivative; branch 2 (for non-decreasing a, b with b(0) > 0)
requires the combination

    t (log t)^{1+eps} f_a(t-2) b(t) / (f_a'(t-2) f_a(t-3))

to stay bounded.  Everything is evaluated in log space from the (log f, u)
representation, so explosively growing profiles remain checkable.

A limit being finite is not decidable from a finite window; the verdict
therefore always carries a caveat flag, and "bounded" is operationalized as
"non-increasing over the final decade of the window".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, HypothesisError
from .jacobi import JacobiSolution, solve_jacobi
from .profiles import CurvatureProfile, DataC, check_c_conditions, default_grid

SLACK_TOL = 1e-9  # roundoff allowance for log-space slacks at equality cases
SERIES_FLOOR = 0.1  # branch-2 offsets t-2, t-3 must stay clear of the origin

CAVEAT = "asymptotic claim checked on finite window only"


@dataclass(frozen=True)
class ScParams:
    """Constants for the pinching checks.

    eps and eps_tilde mirror the profile data so the parameter chain
    eps_tilde < eps1 < eps and 0 < alpha < eps1 - eps_tilde is enforced at
    construction; ``decide_sc`` cross-checks them against its DataC.
    """

    eps: float
    eps_tilde: float
    eps1: float
    alpha: float
    lam: float
    t0: float
    pinch2_eps: float = 0.1

    def __post_init__(self):
        if not (self.eps_tilde < self.eps1 < self.eps):
            raise DomainError(
                f"need eps_tilde < eps1 < eps, got {self.eps_tilde}, {self.eps1}, {self.eps}"
            )
        if not (0 < self.alpha < self.eps1 - self.eps_tilde):
            raise DomainError(
                f"need 0 < alpha < eps1 - eps_tilde = {self.eps1 - self.eps_tilde}, "
                f"got alpha={self.alpha}"
            )
        if not (0 < self.lam < 1):
            raise DomainError(f"need 0 < lambda < 1, got {self.lam}")
        if self.t0 <= 0:
            raise DomainError(f"need t0 > 0, got {self.t0}")
        if self.pinch2_eps <= 0:
            raise DomainError(f"need pinch2_eps > 0, got {self.pinch2_eps}")

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "eps_tilde": self.eps_tilde, "eps1": self.eps1,
            "alpha": self.alpha, "lambda": self.lam, "t0": self.t0,
            "pinch2_eps": self.pinch2_eps,
        }


@dataclass(frozen=True)
class ScVerdict:
    """Decision record: which branch certified, with numeric evidence."""

    branch: str  # branch1 | branch1-increasing-b | branch2 | none
    witness: Optional[ScParams]
    evidence: dict = field(default_factory=dict)
    caveat: str = CAVEAT

    @property
    def certified(self) -> bool:
        return self.branch != "none"

    def to_dict(self) -> dict:
        ev = {}
        for key, val in self.evidence.items():
            if isinstance(val, np.ndarray):
                continue  # grids are exported via CSV, not the JSON verdict
            ev[key] = val
        return {
            "branch": self.branch,
            "witness": self.witness.to_dict() if self.witness else None,
            "evidence": ev,
            "caveat": self.caveat,
        }


def _window_grid(window, floor: float) -> np.ndarray:
    lo, hi = float(window[0]), float(window[1])
    if lo <= floor:
        raise DomainError(f"window must start above {floor}, got {lo}")
    if hi <= lo:
        raise DomainError(f"empty window [{lo}, {hi}]")
    return default_grid(lo, hi)


def _log_or_neg_inf(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def branch1_slacks(
    data: DataC, params: ScParams, sol_a: JacobiSolution, ts, increasing_variant: bool
):
    """Pointwise log-space slacks of the two branch-1 bars at radii ts.

    Returns (lower, upper): lower >= 0 means (log t)^eps_tilde / t <= b(t),
    upper >= 0 means b(t) stays below the comparison-solution ratio bound.
    """
    b = data.profile.b
    lower = np.empty(len(ts))
    upper = np.empty(len(ts))
    for i, t in enumerate(ts):
        logt = math.log(t)
        log_b = _log_or_neg_inf(b(t))
        lower[i] = log_b - (params.eps_tilde * math.log(logt) - logt)
        if increasing_variant:
            log_fa_shift = sol_a.log_f_at(t - params.t0)
        else:
            log_fa_shift = sol_a.log_f_at(params.lam * t)
        log_rhs = (
            math.log(sol_a.u_at(t))
            + log_fa_shift
            - logt
            - (1.0 + 2.0 * params.alpha) * math.log(logt)
        )
        upper[i] = log_rhs - log_b
    return lower, upper


def check_branch1(
    data: DataC,
    params: ScParams,
    sol_a: JacobiSolution,
    window,
    increasing_variant: bool = False,
) -> ScVerdict:
    """Check the branch-1 pinching bars pointwise over the window.

    The variant with the shift t - t0 instead of lambda*t applies only when
    b is increasing; requesting it without a monotonicity declaration (or
    with a decreasing b) is a hypothesis error.
    """
    b = data.profile.b
    if b.monotonicity == "none":
        raise HypothesisError("branch 1 needs a declared monotonicity for b")
    if increasing_variant and b.monotonicity != "increasing":
        raise HypothesisError("the shifted variant requires increasing b")
    grid = _window_grid(window, floor=max(data.t1, math.e))
    if increasing_variant and grid[0] - params.t0 <= 0:
        raise DomainError("window start must exceed t0 for the shifted variant")

    lower, upper = branch1_slacks(data, params, sol_a, grid, increasing_variant)
    ok = bool((lower >= -SLACK_TOL).all() and (upper >= -SLACK_TOL).all())
    name = "branch1-increasing-b" if increasing_variant else "branch1"
    return ScVerdict(
        branch=name if ok else "none",
        witness=params if ok else None,
        evidence={
            "variant": name,
            "window": [float(grid[0]), float(grid[-1])],
            "min_slack_lower": float(lower.min()),
            "min_slack_upper": float(upper.min()),
            "grid": grid, "slack_lower": lower, "slack_upper": upper,
        },
    )


def check_branch2(
    data: DataC, sol_a: JacobiSolution, pinch2_eps: float, window
) -> ScVerdict:
    """Evaluate the branch-2 combination in log space over the window.

    Verdict is branch2 when log L is non-increasing across the top decade
    of the window (the operational stand-in for the limit being finite);
    the sup of L and the fitted trend slope are recorded either way.
    """
    prof = data.profile
    for f, name in ((prof.a, "a"), (prof.b, "b")):
        if f.monotonicity != "increasing":
            raise HypothesisError(f"branch 2 requires non-decreasing {name}")
    if prof.b(0.0) <= 0:
        raise HypothesisError("branch 2 requires b(0) > 0")
    lo, hi = float(window[0]), float(window[1])
    if lo <= 3.0 + SERIES_FLOOR:
        raise DomainError(f"window start {lo} too small to fit the t-3 offset")
    if lo <= math.e:
        raise DomainError("window must start above e")
    grid = default_grid(lo, hi)

    log_L = np.empty(len(grid))
    for i, t in enumerate(grid):
        logt = math.log(t)
        log_L[i] = (
            logt
            + (1.0 + pinch2_eps) * math.log(logt)
            + math.log(prof.b(t))
            - math.log(sol_a.u_at(t - 2.0))
            - sol_a.log_f_at(t - 3.0)
        )

    decade = grid >= hi / 10.0
    dl = np.diff(log_L[decade])
    scale = np.maximum(np.abs(log_L[decade][:-1]), 1.0)
    nonincreasing = bool((dl <= SLACK_TOL * scale).all())
    # least-squares rate of log L per unit t over the final decade
    td = grid[decade]
    slope = float(np.polyfit(td, log_L[decade], 1)[0]) if td.size >= 2 else 0.0
    sup_log_L = float(log_L.max())
    return ScVerdict(
        branch="branch2" if nonincreasing else "none",
        witness=None,
        evidence={
            "variant": "branch2",
            "window": [lo, hi],
            "pinch2_eps": pinch2_eps,
            "sup_log_L": sup_log_L,
            "sup_L": math.exp(sup_log_L) if sup_log_L < 709 else math.inf,
            "decade_slope": slope,
            "nonincreasing_final_decade": nonincreasing,
            "grid": grid, "log_L": log_L,
        },
    )


def decide_sc(
    data: DataC,
    params: ScParams,
    window,
    sol_a: Optional[JacobiSolution] = None,
    rtol: float = 1e-10,
) -> ScVerdict:
    """Run the branch checks in order and return the first certificate.

    Branch 1 is tried first (general bar, then the shifted variant when b
    is increasing) because it needs no hypotheses beyond the growth
    conditions and a monotonicity declaration; branch 2 follows.  When no
    branch certifies, the verdict collects every sub-check's evidence.
    """
    if not (math.isclose(params.eps, data.eps) and math.isclose(params.eps_tilde, data.eps_tilde)):
        raise DomainError("ScParams eps/eps_tilde must match the profile data")
    lo, hi = float(window[0]), float(window[1])
    if sol_a is None:
        sol_a = solve_jacobi(data.profile.a, hi * 1.01, rtol=rtol)

    trail: dict = {}
    branch1_applicable = False
    try:
        grid = _window_grid(window, floor=max(data.t1, math.e))
        c_report = check_c_conditions(data, grid)
        trail["c_conditions"] = c_report.to_dict()
        branch1_applicable = c_report.passed
    except DomainError as exc:
        trail["c_conditions"] = {"error": str(exc)}

    if branch1_applicable:
        v = check_branch1(data, params, sol_a, window, increasing_variant=False)
        trail["branch1"] = v.evidence
        if v.certified:
            return ScVerdict(branch=v.branch, witness=params,
                             evidence={**trail, "winner": v.evidence})
        if data.profile.b.monotonicity == "increasing" and lo > params.t0:
            v = check_branch1(data, params, sol_a, window, increasing_variant=True)
            trail["branch1-increasing-b"] = v.evidence
            if v.certified:
                return ScVerdict(branch=v.branch, witness=params,
                                 evidence={**trail, "winner": v.evidence})

    try:
        v = check_branch2(data, sol_a, params.pinch2_eps, window)
        trail["branch2"] = v.evidence
        if v.certified:
            return ScVerdict(branch="branch2", witness=params,
                             evidence={**trail, "winner": v.evidence})
    except (HypothesisError, DomainError) as exc:
        trail["branch2"] = {"skipped": str(exc)}

    return ScVerdict(branch="none", witness=None, evidence=trail)
