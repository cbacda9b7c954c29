import math

import numpy as np
import pytest

from radialgeo.errors import DomainError
from radialgeo.jacobi import solve_jacobi
from radialgeo.profiles import catalog_lookup
from radialgeo.surfaces import (
    GeoPoint,
    MassRatioSeries,
    RotSymSurface,
    angular_gradient_bound,
    ball_volume,
    clairaut_distance,
    cone_inequality_check,
    cone_mass,
    distance,
    geodesic_slice_series,
    monotonicity_check,
    radial_cone_series,
    unit_ball_volume,
)

from oracles import displaced_cone_mass_ratio, hyperbolic_law_of_cosines


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def test_distance_law_of_cosines_example(hyp_surface):
    d = distance(hyp_surface, GeoPoint.of(1.0, 0.0), GeoPoint.of(1.0, math.pi / 2))
    assert d == pytest.approx(math.acosh(math.cosh(1.0) ** 2), rel=1e-12)


def test_clairaut_matches_law_of_cosines_on_random_pairs(hyp_surface_general):
    rng = np.random.default_rng(123)
    for _ in range(100):
        p = GeoPoint.of(rng.uniform(0.05, 5.0), rng.uniform(0.0, 2.0 * math.pi))
        q = GeoPoint.of(rng.uniform(0.05, 5.0), rng.uniform(0.0, 2.0 * math.pi))
        d_shoot = clairaut_distance(hyp_surface_general, p, q)
        d_oracle = hyperbolic_law_of_cosines(p.r, p.theta, q.r, q.theta)
        assert abs(d_shoot - d_oracle) <= 1e-8 * max(1.0, d_oracle)


def test_clairaut_symmetry(hyp_surface_general):
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = GeoPoint.of(rng.uniform(0.2, 4.0), rng.uniform(0.0, 2 * math.pi))
        q = GeoPoint.of(rng.uniform(0.2, 4.0), rng.uniform(0.0, 2 * math.pi))
        assert clairaut_distance(hyp_surface_general, p, q) == pytest.approx(
            clairaut_distance(hyp_surface_general, q, p), abs=1e-8)


def test_distance_identity_and_radial_cases(hyp_surface_general, flat_surface):
    p = GeoPoint.of(1.3, 0.4)
    assert clairaut_distance(hyp_surface_general, p, p) == 0.0
    assert distance(flat_surface, GeoPoint.of(1.0, 0.0), GeoPoint.of(2.0, 0.0)) \
        == pytest.approx(1.0, rel=1e-12)
    # through the pole
    assert clairaut_distance(hyp_surface_general, GeoPoint.of(1.0, 0.0),
                             GeoPoint.of(2.0, math.pi)) == pytest.approx(3.0, abs=1e-9)
    # from the pole
    assert clairaut_distance(hyp_surface_general, GeoPoint.of(0.0, 0.0),
                             GeoPoint.of(2.0, 1.0)) == pytest.approx(2.0)


def test_distance_metric_properties_random_triples(hyp_surface, flat_surface):
    rng = np.random.default_rng(99)
    for surface in (hyp_surface, flat_surface):
        for _ in range(100):
            pts = [GeoPoint.of(rng.uniform(0.0, 4.0), rng.uniform(0.0, 2 * math.pi))
                   for _ in range(3)]
            d01 = distance(surface, pts[0], pts[1])
            d10 = distance(surface, pts[1], pts[0])
            d12 = distance(surface, pts[1], pts[2])
            d02 = distance(surface, pts[0], pts[2])
            assert abs(d01 - d10) <= 1e-8
            assert d02 <= d01 + d12 + 1e-7


def test_clairaut_triangle_inequality_general_path(hyp_surface_general):
    rng = np.random.default_rng(5)
    for _ in range(8):
        pts = [GeoPoint.of(rng.uniform(0.3, 3.0), rng.uniform(0.0, 2 * math.pi))
               for _ in range(3)]
        d01 = clairaut_distance(hyp_surface_general, pts[0], pts[1])
        d12 = clairaut_distance(hyp_surface_general, pts[1], pts[2])
        d02 = clairaut_distance(hyp_surface_general, pts[0], pts[2])
        assert d02 <= d01 + d12 + 1e-7


def test_clairaut_on_log_pinched_warp(lp_profile):
    # smoke the general path on a genuinely non-constant-curvature warp:
    # metric distances stay between the flat and most-curved comparisons
    sol = solve_jacobi(lp_profile.a, 50.0, rtol=1e-10)
    surf = RotSymSurface.from_jacobi(sol)
    p, q = GeoPoint.of(12.0, 0.0), GeoPoint.of(14.0, 0.5)
    d = clairaut_distance(surf, p, q)
    flat = math.sqrt(12.0**2 + 14.0**2 - 2 * 12 * 14 * math.cos(0.5))
    assert d >= flat - 1e-9
    assert d <= hyperbolic_law_of_cosines(2 * 12.0, 0.0, 2 * 14.0, 0.5) / 2.0 + 1.0


# ---------------------------------------------------------------------------
# angular gradient
# ---------------------------------------------------------------------------

def test_angular_gradient_values(hyp_surface, flat_surface, superexp_sol):
    assert angular_gradient_bound(hyp_surface, GeoPoint.of(2.0, 0.0)) \
        == pytest.approx(1.0 / math.sinh(2.0), rel=1e-12)
    assert angular_gradient_bound(flat_surface, GeoPoint.of(2.0, 0.0)) \
        == pytest.approx(0.5, rel=1e-12)
    surf = RotSymSurface.from_jacobi(superexp_sol)
    assert angular_gradient_bound(surf, GeoPoint.of(3.0, 0.0)) == pytest.approx(
        math.exp(-superexp_sol.log_f_at(3.0)), rel=1e-12)
    with pytest.raises(DomainError):
        angular_gradient_bound(hyp_surface, GeoPoint.of(0.0, 0.0))


# ---------------------------------------------------------------------------
# volumes
# ---------------------------------------------------------------------------

def test_ball_volume_closed_forms(hyp_surface, flat_surface):
    assert ball_volume(hyp_surface, 2, 1.0) == pytest.approx(
        2.0 * math.pi * (math.cosh(1.0) - 1.0), rel=1e-10)
    assert ball_volume(flat_surface, 2, 1.0) == pytest.approx(math.pi, rel=1e-10)
    h3 = RotSymSurface.hyperbolic(dim=3)
    assert ball_volume(h3, 3, 2.0) == pytest.approx(
        math.pi * (math.sinh(4.0) - 4.0), rel=1e-10)


def test_flat_ball_volume_scaling():
    for k, dim in ((2, 3), (3, 3)):
        surf = RotSymSurface.euclidean(dim=dim)
        for t in (0.5, 1.0, 2.5):
            assert ball_volume(surf, k, t) == pytest.approx(
                unit_ball_volume(k) * t**k, rel=1e-8)


def test_ball_volume_validation(hyp_surface):
    with pytest.raises(DomainError):
        ball_volume(hyp_surface, 3, 1.0)  # k exceeds dim
    with pytest.raises(DomainError):
        ball_volume(hyp_surface, 2, -1.0)


def test_cone_mass_examples(hyp_surface):
    assert cone_mass(hyp_surface, 2.0 * math.pi, 2, 1.0) == pytest.approx(
        2.0 * math.pi * (math.cosh(1.0) - 1.0), rel=1e-10)
    e3 = RotSymSurface.euclidean(dim=3)
    assert cone_mass(e3, 1.0, 3, 2.0) == pytest.approx(8.0 / 3.0, rel=1e-10)
    h3 = RotSymSurface.hyperbolic(dim=3)
    assert cone_mass(h3, 2.0 * math.pi, 2, 3.0) == pytest.approx(
        2.0 * math.pi * (math.cosh(3.0) - 1.0), rel=1e-10)


def test_explosive_warp_volume_stays_in_log_space(superexp_sol):
    surf = RotSymSurface.from_jacobi(superexp_sol, dim=2)
    v = ball_volume(surf, 2, 7.0)
    assert math.isfinite(v) and v > 1e80
    assert ball_volume(surf, 2, 9.0) == math.inf  # honest overflow, no crash


def test_upper_density_bound_radial_cone(hyp_surface):
    # mass(B(o, r)) = c_k * ball volume with c_k = gamma/(k alpha_k), exactly
    gamma = 3.7
    c_k = gamma / (2.0 * unit_ball_volume(2))
    for t in (0.5, 1.5, 3.0):
        assert cone_mass(hyp_surface, gamma, 2, t) == pytest.approx(
            c_k * ball_volume(hyp_surface, 2, t), rel=1e-12)


# ---------------------------------------------------------------------------
# mass-ratio monotonicity
# ---------------------------------------------------------------------------

def test_slice_through_pole_ratio_is_one():
    series = geodesic_slice_series(np.linspace(0.3, 5.0, 40), offset=0.0)
    assert np.allclose(series.ratio, 1.0, atol=1e-12)
    assert monotonicity_check(series).passed


def test_radial_cone_ratio_constant(hyp_surface):
    series = radial_cone_series(hyp_surface, 1.7, 2, np.linspace(0.4, 4.0, 30))
    assert np.allclose(series.ratio, series.ratio[0], rtol=1e-9)
    rep = monotonicity_check(series)
    assert rep.passed and rep.max_violation <= 1e-8


def test_offset_slice_still_monotone():
    series = geodesic_slice_series(np.linspace(1.0, 6.0, 50), offset=0.8)
    assert monotonicity_check(series).passed


def test_displaced_cone_violates_monotonicity():
    # non-minimizing test surface: geodesic cone with vertex off the pole,
    # tilted back toward it; the pole-centered ratio dips measurably
    t_grid = np.linspace(1.6, 6.0, 45)
    mass, ball = displaced_cone_mass_ratio(d0=2.0, alpha0=2.5, t_grid=t_grid)
    series = MassRatioSeries(t_grid=t_grid, mass=mass, ball_vol=ball)
    rep = monotonicity_check(series)
    assert not rep.passed
    assert 1e-5 < rep.max_violation < 1e-2
    # the reported violation is what the ratios actually show
    drops = series.ratio[:-1] - series.ratio[1:]
    assert rep.max_violation == pytest.approx(float(drops.max()), rel=1e-12)


def test_series_grid_mismatch_rejected():
    with pytest.raises(DomainError):
        MassRatioSeries(t_grid=np.array([1.0, 2.0]), mass=np.array([1.0]),
                        ball_vol=np.array([1.0, 2.0]))


# ---------------------------------------------------------------------------
# cone inequality
# ---------------------------------------------------------------------------

def test_cone_inequality_radial_cone_equality(hyp_surface):
    mass_fn = lambda t: cone_mass(hyp_surface, 2.0 * math.pi, 2, t)
    rep = cone_inequality_check(hyp_surface, 2, 1.5,
                                slice_mass=2.0 * math.pi * math.sinh(1.5),
                                total_mass_fn=mass_fn)
    assert rep.passed
    assert rep.equality_gap <= 1e-6


def test_cone_inequality_flat_plane_equality(flat_surface):
    mass_fn = lambda t: cone_mass(flat_surface, 2.0 * math.pi, 2, t)
    rep = cone_inequality_check(flat_surface, 2, 2.0,
                                slice_mass=2.0 * math.pi * 2.0,
                                total_mass_fn=mass_fn)
    assert rep.passed and rep.equality_gap <= 1e-6


def test_cone_inequality_offset_disk_strict(hyp_surface):
    d0 = 0.8
    mass_fn = lambda t: 2.0 * math.pi * (math.cosh(t) / math.cosh(d0) - 1.0)
    rep = cone_inequality_check(hyp_surface, 2, 2.0, slice_mass=0.0,
                                total_mass_fn=mass_fn)
    assert rep.passed
    assert rep.residual > 1.0  # strictly slack for the off-pole disk
