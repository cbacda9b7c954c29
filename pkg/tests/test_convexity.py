import math

import numpy as np
import pytest
from scipy.optimize import brentq

from radialgeo.convexity import (
    EpsilonRule,
    betaL_margin,
    certificate_margin,
    epsilon_R,
    find_r0,
    run_construction,
)
from radialgeo.errors import (
    DegenerateProfileError,
    DomainError,
    PreconditionError,
    RadialGeoError,
)
from radialgeo.jacobi import solve_jacobi
from radialgeo.profiles import CurvatureProfile, RadialFunction, catalog_lookup
from radialgeo.sc import ScParams

from oracles import construction_sum_hyperbolic

UNIT = EpsilonRule(beta=0.1, variant="unit-bump", L_bump=4.0)


# ---------------------------------------------------------------------------
# perturbation size
# ---------------------------------------------------------------------------

def test_epsilon_r_unit_bump_closed_form(const_profile, const_sol):
    val = epsilon_R(UNIT, const_profile, const_sol, 3.0)
    assert val == pytest.approx(0.1 / math.tanh(3.0), rel=1e-9)
    assert val == pytest.approx(0.100497, abs=5e-7)


def test_epsilon_r_approaches_beta_at_infinity():
    profile = catalog_lookup("constant", k=2.0)
    sol = solve_jacobi(profile.a, 40.0, rtol=1e-11)
    vals = [epsilon_R(UNIT, profile, sol, R) for R in (1.0, 2.0, 3.0, 4.0)]
    # a = b = k: eps_R = beta * coth(kR) decreases to beta
    assert all(v1 > v2 for v1, v2 in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(0.1, rel=1e-6)


def test_epsilon_r_eps_bump_formula_and_monotonicity(const_profile, const_sol):
    R = 4.0
    u = const_sol.u_at(R)
    prev = 0.0
    for e in (0.1, 0.3, 0.5, 1.0):
        rule = EpsilonRule(beta=0.1, variant="eps-bump", eps=e)
        val = epsilon_R(rule, const_profile, const_sol, R)
        # b == 1: min(e^2, e tanh(e)) = e tanh(e)
        assert val == pytest.approx(0.1 * u * e * math.tanh(e), rel=1e-9)
        assert val > prev
        prev = val
        # small supports perturb less than the unit bump
        assert val < epsilon_R(UNIT, const_profile, const_sol, R)


def test_epsilon_r_degenerate_profile(flat_profile, flat_sol):
    with pytest.raises(DegenerateProfileError):
        epsilon_R(UNIT, flat_profile, flat_sol, 3.0)


def test_epsilon_r_below_threshold(lp_profile, lp_sol):
    with pytest.raises(PreconditionError):
        epsilon_R(UNIT, lp_profile, lp_sol, 5.0)  # r_star is 10


def test_rule_validation():
    with pytest.raises(DomainError):
        EpsilonRule(beta=0.0)
    with pytest.raises(DomainError):
        EpsilonRule(beta=0.1, variant="eps-bump")  # missing eps
    with pytest.raises(DomainError):
        EpsilonRule(beta=0.1, variant="mystery")


# ---------------------------------------------------------------------------
# Hessian margin
# ---------------------------------------------------------------------------

def test_margin_at_zero_beta_is_u(const_profile, const_sol):
    rule = EpsilonRule(beta=1e-300)
    assert betaL_margin(rule, const_profile, const_sol, 3.0) == pytest.approx(
        const_sol.u_at(3.0), rel=1e-12)


def test_margin_affine_in_beta(const_profile, const_sol):
    R = 5.0
    ms = [betaL_margin(EpsilonRule(beta=b), const_profile, const_sol, R)
          for b in (0.01, 0.02, 0.03)]
    assert abs(ms[2] - 2.0 * ms[1] + ms[0]) <= 1e-12
    # two-point fit predicts the third value
    slope = (ms[1] - ms[0]) / 0.01
    assert ms[2] == pytest.approx(ms[0] + 2.0 * 0.01 * slope, abs=1e-12)
    assert slope < 0


def test_margin_root_matches_bisection(const_profile, const_sol):
    R = 5.0
    u = const_sol.u_at(R)
    k = const_profile.b(0.0)
    bracket = u + const_profile.b(R + 1.0) / math.tanh(k / 2.0) + 1.0
    analytic_root = const_profile.b(R + 1.0) / (4.0 * bracket)
    root = brentq(
        lambda b: betaL_margin(EpsilonRule(beta=b, L_bump=4.0),
                               const_profile, const_sol, R),
        1e-6, 10.0, xtol=1e-14, rtol=8.9e-16)
    assert root == pytest.approx(analytic_root, abs=1e-10)
    assert betaL_margin(EpsilonRule(beta=0.5 * root), const_profile,
                        const_sol, R) > 0
    assert betaL_margin(EpsilonRule(beta=100.0), const_profile,
                        const_sol, R) < 0


def test_margin_eps_bump_variant_positive_for_small_beta(const_profile, const_sol):
    rule = EpsilonRule(beta=1e-3, variant="eps-bump", eps=0.25)
    assert betaL_margin(rule, const_profile, const_sol, 5.0) > 0


# ---------------------------------------------------------------------------
# certificate margin
# ---------------------------------------------------------------------------

def test_certificate_zero_c4_keeps_only_dominant(lp_data, lp_params, lp_sol):
    cm = certificate_margin(lp_data, lp_params, lp_sol, R=10.0,
                            log_rho=2e5, c4=0.0)
    assert cm.hessian_h == 0.0 and cm.bracket == 0.0
    assert cm.margin == cm.dominant > 0


def test_certificate_positive_across_boundary_regime(lp_data, lp_params, lp_sol):
    for log_rho in np.geomspace(1e5, 1e9, 9):
        cm = certificate_margin(lp_data, lp_params, lp_sol, R=10.0,
                                log_rho=float(log_rho), c4=1.0)
        assert cm.mode == "asymptotic-bounds"
        assert cm.margin > 0
        assert cm.margin == cm.dominant + cm.hessian_h + cm.bracket


def test_certificate_regime_and_domain_errors(lp_data, lp_params, lp_sol):
    with pytest.raises(PreconditionError):
        certificate_margin(lp_data, lp_params, lp_sol, R=11.0, log_rho=1e5)
    with pytest.raises(DomainError):
        certificate_margin(lp_data, lp_params, lp_sol, R=0.5, rho=2.0)
    with pytest.raises(DomainError):
        certificate_margin(lp_data, lp_params, lp_sol, R=1.0, rho=10.0,
                           log_rho=100.0)


def test_certificate_solver_mode(lp_data, lp_sol):
    params = ScParams(eps=1.0, eps_tilde=0.5, eps1=0.75, alpha=0.24,
                      lam=0.75, t0=1.0)
    cm = certificate_margin(lp_data, params, lp_sol, R=1.2, rho=5e4, c4=0.5)
    assert cm.mode == "solver"
    assert cm.margin == cm.dominant + cm.hessian_h + cm.bracket


def test_certificate_monotonicities(lp_data, lp_params, lp_sol):
    margins_R = [certificate_margin(lp_data, lp_params, lp_sol, R=R,
                                    log_rho=1e6, c4=1.0).margin
                 for R in (2.0, 5.0, 10.0)]
    assert margins_R[0] < margins_R[1] < margins_R[2]
    margins_c4 = [certificate_margin(lp_data, lp_params, lp_sol, R=10.0,
                                     log_rho=1e6, c4=c).margin
                  for c in (0.0, 0.5, 1.0, 2.0)]
    assert all(m1 > m2 for m1, m2 in zip(margins_c4, margins_c4[1:]))


# ---------------------------------------------------------------------------
# exhaustion trace
# ---------------------------------------------------------------------------

def test_construction_r0_five_exceeds_tight_budget(const_profile, const_sol):
    # the direct sum at r0 = 5 is ~0.5, far over a budget of 0.1
    trace = run_construction(const_profile, const_sol, UNIT, r0=5.0,
                             alpha_budget=0.1)
    assert not trace.converged
    assert trace.status == "budget-exceeded"
    oracle = construction_sum_hyperbolic(0.1, 1.0, 5.0)
    assert oracle > 0.1


def test_find_r0_matches_direct_summation_oracle(const_profile, const_sol):
    r0 = find_r0(const_profile, const_sol, UNIT, alpha_budget=0.1, c_angle=1.0)
    assert math.isfinite(r0)
    trace = run_construction(const_profile, const_sol, UNIT, r0=r0,
                             alpha_budget=0.1)
    assert trace.converged and trace.status == "converged"
    # oracle partial sum over the same intervals
    oracle_partial = construction_sum_hyperbolic(0.1, 1.0, r0,
                                                 n_terms=len(trace.rows))
    assert abs(oracle_partial - trace.partial_sum) <= 1e-10
    # full oracle sum fits the budget and the recorded tail bound
    oracle_full = construction_sum_hyperbolic(0.1, 1.0, r0)
    assert oracle_full <= 0.1
    assert oracle_full <= trace.partial_sum + trace.tail_bound + 1e-12


def test_trace_bookkeeping_invariants(const_profile, const_sol):
    trace = run_construction(const_profile, const_sol, UNIT, r0=7.0,
                             alpha_budget=0.1)
    # steps compose exactly: r_{i+1} = r_i + eps_i as floating point ops
    acc = trace.r0
    for i, (idx, r_i, eps_i) in enumerate(trace.steps):
        assert idx == i
        assert r_i == acc
        acc = acc + eps_i
    # telescoping refold reproduces the last radius exactly
    last_i, last_r, last_eps = trace.steps[-1]
    assert acc == last_r + last_eps
    # realized step count per interval stays within the bound
    for row in trace.rows:
        assert row.realized_steps <= math.ceil(row.t_n_bound) + 1
    # partial sums non-decreasing; eps non-increasing on this model
    sums = [row.partial_sum for row in trace.rows]
    assert all(s1 <= s2 for s1, s2 in zip(sums, sums[1:]))
    assert trace.eps_nonincreasing
    # budget soundness at the stopping index
    assert trace.partial_sum + trace.tail_bound <= trace.alpha_budget


def test_construction_harmonic_variant(const_profile, const_sol):
    rule = EpsilonRule(beta=0.1, variant="harmonic-step")
    trace = run_construction(const_profile, const_sol, rule, r0=7.0,
                             alpha_budget=0.5, n_max=60)
    # interval edges follow the harmonic series
    assert trace.rows[0].r_hi == pytest.approx(8.0)
    assert trace.rows[1].r_hi == pytest.approx(8.5)
    assert trace.rows[2].r_hi == pytest.approx(8.5 + 1.0 / 3.0)
    for row in trace.rows:
        assert row.product == pytest.approx(row.t_n_bound * row.theta_n_bound,
                                            rel=1e-12)


def test_construction_diverging_model(const_profile, const_sol):
    # b(t) = t * f'(t) explodes fast enough that the per-interval product
    # grows, so no budget is ever met
    b = RadialFunction(fn=lambda t: t * const_sol.fprime_at(t),
                       monotonicity="increasing", label="t f'")
    profile = CurvatureProfile(a=const_profile.a, b=b)
    trace = run_construction(profile, const_sol, UNIT, r0=5.0,
                             alpha_budget=1.5, n_max=10)
    assert not trace.converged
    assert trace.status in ("budget-exceeded", "inconclusive")
    with pytest.raises(RadialGeoError):
        find_r0(profile, const_sol, UNIT, alpha_budget=1.5, c_angle=1.0,
                r0_min=5.0, r0_max=20.0, step=1.0, n_max=10)


def test_find_r0_budget_monotonicity(const_profile, const_sol):
    tight = find_r0(const_profile, const_sol, UNIT, alpha_budget=0.1)
    loose = find_r0(const_profile, const_sol, UNIT, alpha_budget=1.5)
    assert loose <= tight


def test_construction_preconditions(const_profile, const_sol):
    with pytest.raises(PreconditionError):
        run_construction(const_profile, const_sol, UNIT, r0=5.0,
                         alpha_budget=math.pi)
    with pytest.raises(PreconditionError):
        run_construction(const_profile, const_sol, UNIT, r0=0.5,
                         alpha_budget=0.1)
    with pytest.raises(PreconditionError):
        find_r0(const_profile, const_sol, UNIT, alpha_budget=math.pi)
