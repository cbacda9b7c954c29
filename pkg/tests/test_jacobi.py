import math

import numpy as np
import pytest
from scipy.integrate import quad

from radialgeo.errors import DomainError, HypothesisError, RadialGeoError
from radialgeo.jacobi import (
    implemma_check,
    jacest_check,
    log_lower_cosh_bound,
    lower_cosh_bound,
    solve_jacobi,
)
from radialgeo.profiles import CurvatureProfile, RadialFunction, catalog_lookup


def constant_profile(k):
    return catalog_lookup("constant", k=k)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_constant_curvature_oracle(k):
    sol = solve_jacobi(constant_profile(k).a, 21.0, rtol=1e-11)
    for t in np.linspace(0.1, 20.0, 41):
        f_exact = math.sinh(k * t) / k
        u_exact = k / math.tanh(k * t)
        assert sol.f_at(t) == pytest.approx(f_exact, rel=1e-8)
        assert sol.u_at(t) == pytest.approx(u_exact, rel=1e-8)


def test_flat_solution_exact(flat_sol):
    for t in (0.1, 1.0, 10.0, 25.0):
        assert flat_sol.f_at(t) == pytest.approx(t, rel=1e-9)
        assert flat_sol.u_at(t) == pytest.approx(1.0 / t, rel=1e-9)
    assert flat_sol.f_at(0.0) == 0.0
    assert flat_sol.log_f_at(0.0) == -math.inf


def test_sinh_of_sinh_identity(superexp_sol, superexp_profile):
    # f''/f recovered by finite differences must match the catalog curvature
    for t in (1.0, 2.0, 3.0):
        h = 1e-4
        fd = (superexp_sol.f_at(t + h) - 2.0 * superexp_sol.f_at(t)
              + superexp_sol.f_at(t - h)) / h**2 / superexp_sol.f_at(t)
        assert fd == pytest.approx(superexp_profile.a(t) ** 2, rel=1e-5)
    # and the solution is sinh(sinh t) itself
    for t in (1.0, 3.0, 6.0):
        assert superexp_sol.f_at(t) == pytest.approx(
            math.sinh(math.sinh(t)), rel=1e-7)


def test_overflow_policy_log_fields_survive(superexp_sol):
    # f overflows a double near t ~ 7.6 but the log/ratio interface keeps working
    assert superexp_sol.f_at(8.5) == math.inf
    lf = superexp_sol.log_f_at(8.5)
    assert math.isfinite(lf) and lf > 709
    # closed-form oracle for the ratio: sinh(sinh) in log space
    def log_sinh_sinh(t):
        s = math.sinh(t)
        return s - math.log(2.0) + math.log1p(-math.exp(-2.0 * s))
    oracle = math.exp(log_sinh_sinh(8.5) - log_sinh_sinh(8.4))
    assert superexp_sol.ratio(8.5, 8.4) == pytest.approx(oracle, rel=1e-7)
    assert 1.0 < superexp_sol.ratio(8.5, 8.4) < math.inf


def test_negative_k_rejected():
    bad = RadialFunction(fn=lambda t: -1.0, monotonicity="none")
    with pytest.raises(DomainError):
        solve_jacobi(bad, 5.0)


def test_rtol_validation(const_profile):
    with pytest.raises(DomainError):
        solve_jacobi(const_profile.a, 5.0, rtol=0.5)


def test_sturm_monotone_comparison():
    sols = {k: solve_jacobi(constant_profile(k).a, 25.0, rtol=1e-11)
            for k in (0.5, 1.0, 2.0)}
    grid = np.linspace(0.2, 24.0, 40)
    for k1, k2 in ((0.5, 1.0), (1.0, 2.0), (0.5, 2.0)):
        for t in grid:
            assert sols[k1].u_at(t) <= sols[k2].u_at(t) * (1 + 1e-10)
            assert sols[k1].log_f_at(t) <= sols[k2].log_f_at(t) + 1e-9


def test_sturm_comparison_variable_profile(lp_profile, lp_sol):
    # log-pinched a never exceeds its core level 2, so the k=2 solution
    # dominates everywhere
    sol2 = solve_jacobi(constant_profile(2.0).a, 50.0, rtol=1e-11)
    for t in np.geomspace(0.5, 49.0, 25):
        assert lp_sol.u_at(t) <= sol2.u_at(t) * (1 + 1e-10)
        assert lp_sol.log_f_at(t) <= sol2.log_f_at(t) + 1e-9


def test_riccati_residual_integral_form(const_profile, lp_profile):
    # integral form of u' = k^2 - u^2 between grid points; the differential
    # form amplifies interpolation noise by 1/h and cannot meet this bound
    cases = [(const_profile, 20.0), (lp_profile, 1000.0)]
    for profile, tmax in cases:
        sol = solve_jacobi(profile.a, tmax, rtol=1e-10)
        for t1 in np.geomspace(0.5, tmax * 0.8, 20):
            t2 = min(t1 * 1.2, tmax)
            lhs = sol.u_at(t2) - sol.u_at(t1)
            rhs, _ = quad(lambda s: profile.a(s) ** 2 - sol.u_at(s) ** 2, t1, t2,
                          epsabs=1e-14, epsrel=1e-12, limit=200)
            kmax = max(profile.a(t1), profile.a(t2))
            assert abs(lhs - rhs) <= 10.0 * 1e-10 * (1.0 + kmax**2) * max(1.0, t2 - t1)


# ---------------------------------------------------------------------------
# growth estimates
# ---------------------------------------------------------------------------

def test_jacest_log_pinched_passes_with_finite_threshold(lp_sol):
    rep = jacest_check(lp_sol, eps=1.0, eps1=0.5, t_range=(3.0, 1e5))
    assert rep.passed
    assert rep.r1 is not None and rep.r1 < 1e3
    assert rep.r1_fprime is not None


def test_jacest_constant_curvature_passes(const_sol):
    rep = jacest_check(const_sol, eps=1.0, eps1=0.5, t_range=(3.0, 55.0))
    assert rep.passed
    assert rep.r1 == pytest.approx(3.0)


def test_jacest_flat_fails_everywhere(flat_sol):
    rep = jacest_check(flat_sol, eps=1.0, eps1=0.5, t_range=(3.0, 29.0))
    assert not rep.passed
    assert (rep.slack_u < 0).all()
    assert (rep.slack_log_f < 0).all()


def test_jacest_domain_errors(const_sol):
    with pytest.raises(DomainError):
        jacest_check(const_sol, eps=1.0, eps1=0.5, t_range=(2.0, 50.0))
    with pytest.raises(DomainError):
        jacest_check(const_sol, eps=0.5, eps1=0.5, t_range=(3.0, 50.0))


# ---------------------------------------------------------------------------
# integral pinching bound
# ---------------------------------------------------------------------------

def test_implemma_identical_profiles(const_profile):
    rep = implemma_check(const_profile, 20.0, rtol=1e-10)
    assert rep.bound.integral_I == pytest.approx(0.0, abs=1e-12)
    assert rep.bound.c_bound == pytest.approx(1.0, rel=1e-12)
    assert rep.max_log_ratio_gap <= 1e-8
    assert rep.passed


def test_implemma_derived_profile():
    a = RadialFunction(fn=lambda t: 1.0 + t, dfn=lambda t: 1.0,
                       monotonicity="increasing", label="1+t")
    b = RadialFunction(fn=lambda t: math.sqrt((1.0 + t) ** 2 + math.exp(-t)),
                       monotonicity="increasing", label="bumped")
    profile = CurvatureProfile(a=a, b=b, r_star=0.0)
    rep = implemma_check(profile, 30.0, rtol=1e-10)
    oracle, _ = quad(lambda t: math.exp(-t) / math.sqrt((1 + t) ** 2 + math.exp(-t)),
                     0.0, 30.0, epsabs=1e-13, epsrel=1e-12)
    assert rep.bound.integral_I == pytest.approx(oracle, rel=1e-9)
    assert rep.bound.c_bound == pytest.approx(math.exp(math.pi / 2 * oracle), rel=1e-9)
    assert rep.max_violation <= 1e-6
    assert rep.passed


def test_implemma_rejects_decreasing_profile(lp_profile):
    with pytest.raises(HypothesisError):
        implemma_check(lp_profile, 30.0)


def test_implemma_divergent_tail_needs_majorant():
    a = RadialFunction(fn=lambda t: 1.0, monotonicity="increasing")
    b = RadialFunction(fn=lambda t: 1.0 + math.log1p(t), monotonicity="increasing")
    profile = CurvatureProfile(a=a, b=b)
    with pytest.raises(RadialGeoError, match="tail"):
        implemma_check(profile, 30.0)


def test_implemma_accepts_declared_tail_bound():
    a = RadialFunction(fn=lambda t: 1.0 + t, dfn=lambda t: 1.0,
                       monotonicity="increasing")
    b = RadialFunction(fn=lambda t: math.sqrt((1.0 + t) ** 2 + math.exp(-t)),
                       monotonicity="increasing")
    profile = CurvatureProfile(a=a, b=b)
    tail = math.exp(-30.0)  # integrand below e^{-t}
    rep = implemma_check(profile, 30.0, tail_bound=tail)
    assert rep.passed
    assert rep.bound.integral_I > tail


# ---------------------------------------------------------------------------
# comparison lower bound
# ---------------------------------------------------------------------------

def test_lower_cosh_bound_hyperbolic(const_sol):
    bound = lower_cosh_bound(const_sol, 1.0, 2.0)
    assert bound == pytest.approx(math.sinh(1.0) * math.cosh(1.0), rel=1e-8)
    assert bound <= math.sinh(2.0)


def test_lower_cosh_bound_flat(flat_sol):
    assert lower_cosh_bound(flat_sol, 1.0, 2.0) == pytest.approx(1.0, rel=1e-9)
    assert flat_sol.f_at(2.0) >= 1.0


def test_lower_cosh_bound_log_pinched(lp_profile, lp_sol):
    lb = log_lower_cosh_bound(lp_sol, 10.0, 20.0)
    assert lb <= lp_sol.log_f_at(20.0) + 1e-12


def test_lower_cosh_bound_rejects_reversed_arguments(const_sol):
    with pytest.raises(DomainError):
        lower_cosh_bound(const_sol, 2.0, 1.0)


def test_csv_rows_shape(const_sol):
    rows = list(const_sol.csv_rows())
    assert rows[0] == ("t", "log_f", "u")
    assert len(rows) == len(const_sol.t_grid) + 1
