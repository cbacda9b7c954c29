"""Rotationally symmetric model geometry.

A surface dr^2 + f(r)^2 dtheta^2 with convex warping f (f(0)=0, f'(0)=1)
carries everything the toolkit measures: geodesic distances via the
Clairaut first integral f(r)^2 theta' = const, angular gradient bounds,
k-dimensional ball and cone volumes, the mass-ratio monotonicity of
pole-centered balls, and the cone comparison inequality.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from . import hyperbolic as hb
from .errors import DegenerateProfileError, DomainError, RadialGeoError
from .jacobi import JacobiSolution


class GeoPoint(NamedTuple):
    r: float
    theta: float

    @staticmethod
    def of(r: float, theta: float) -> "GeoPoint":
        if r < 0 or not math.isfinite(r):
            raise DomainError(f"radius must be finite and >= 0, got {r}")
        return GeoPoint(float(r), hb.wrap_angle(float(theta)))


def unit_ball_volume(k: int) -> float:
    """Volume of the k-dimensional Euclidean unit ball."""
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


@dataclass(frozen=True)
class RotSymSurface:
    """Warped-product surface dr^2 + f(r)^2 dtheta^2 inside an n-manifold.

    ``const_kappa`` marks the constant-curvature cases (kappa > 0
    hyperbolic, 0 flat) where closed forms replace quadrature.  ``ksq`` is
    the radial curvature datum f''/f used by geodesic spreading; ``log_warp``
    and ``u_warp``, when the warp comes from a comparison ODE solve, keep
    explosive warps usable.
    """

    warp: Callable[[float], float]
    dwarp: Callable[[float], float]
    ksq: Callable[[float], float]
    dim: int = 2
    const_kappa: Optional[float] = None
    log_warp: Optional[Callable[[float], float]] = None
    u_warp: Optional[Callable[[float], float]] = None
    t_max: float = math.inf
    label: str = ""

    # -- constructors ------------------------------------------------------

    @staticmethod
    def hyperbolic(kappa: float = 1.0, dim: int = 2) -> "RotSymSurface":
        if kappa <= 0:
            raise DomainError("kappa must be > 0")
        return RotSymSurface(
            warp=lambda r: math.sinh(kappa * r) / kappa,
            dwarp=lambda r: math.cosh(kappa * r),
            ksq=lambda r: kappa * kappa,
            dim=dim, const_kappa=kappa,
            log_warp=lambda r: (math.log(math.sinh(kappa * r) / kappa) if kappa * r < 20
                                else kappa * r - math.log(2.0 * kappa)
                                + math.log1p(-math.exp(-2.0 * kappa * r))),
            u_warp=lambda r: kappa / math.tanh(kappa * r),
            label=f"hyperbolic kappa={kappa}",
        )

    @staticmethod
    def euclidean(dim: int = 2) -> "RotSymSurface":
        return RotSymSurface(
            warp=lambda r: r, dwarp=lambda r: 1.0, ksq=lambda r: 0.0,
            dim=dim, const_kappa=0.0,
            log_warp=lambda r: math.log(r) if r > 0 else -math.inf,
            u_warp=lambda r: 1.0 / r,
            label="euclidean",
        )

    @staticmethod
    def from_jacobi(sol: JacobiSolution, dim: int = 2, label: str = "") -> "RotSymSurface":
        ksq = lambda r: sol.k_profile(r) ** 2
        return RotSymSurface(
            warp=sol.f_at, dwarp=sol.fprime_at, ksq=ksq, dim=dim,
            const_kappa=None, log_warp=sol.log_f_at, u_warp=sol.u_at,
            t_max=sol.t_max, label=label or "jacobi warp",
        )

    # -- basic queries -----------------------------------------------------

    def warp_inv(self, value: float, hi: float) -> float:
        """Radius where f(r) = value (f is increasing); search in (0, hi]."""
        if value <= 0:
            return 0.0
        return brentq(lambda r: self.warp(r) - value, 1e-300, hi, xtol=1e-15, rtol=8.9e-16)


# ---------------------------------------------------------------------------
# geodesic distance
# ---------------------------------------------------------------------------

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=200)


def _sub_integrals(surface: RotSymSurface, nu: float, r_lo: float, r_hi: float):
    """(swept angle, length) of a geodesic leg from r_lo up to r_hi.

    Substitutes r = r_lo + u^2 so the inverse-square-root behavior when
    f(r_lo) = nu (turning point) integrates cleanly.
    """
    if r_hi <= r_lo:
        return 0.0, 0.0
    f = surface.warp
    u_hi = math.sqrt(r_hi - r_lo)

    def root_at(u: float):
        # sqrt(f^2 - nu^2) at r = r_lo + u^2, with the turning-point limit
        # sqrt(f^2-nu^2) ~ u sqrt(2 nu f'(r_lo)) substituted near u = 0
        r = r_lo + u * u
        fr = f(r)
        gap = fr * fr - nu * nu
        if gap <= (1e-14 * fr) ** 2:
            d = surface.dwarp(r_lo)
            return r, fr, max(u, 1e-150) * math.sqrt(max(2.0 * nu * d, 1e-300))
        return r, fr, math.sqrt(gap)

    def ang(u: float) -> float:
        _, fr, root = root_at(u)
        return 2.0 * u * nu / (fr * root)

    def arc(u: float) -> float:
        _, fr, root = root_at(u)
        return 2.0 * u * fr / root

    with warnings.catch_warnings():
        # QUADPACK reaches its roundoff floor near turning points well below
        # the accuracy we need; the returned best estimate is what we want
        warnings.simplefilter("ignore", IntegrationWarning)
        a, _ = quad(ang, 0.0, u_hi, **_QUAD_OPTS)
        s, _ = quad(arc, 0.0, u_hi, **_QUAD_OPTS)
    return a, s


def _monotone_leg(surface: RotSymSurface, nu: float, r1: float, r2: float):
    return _sub_integrals(surface, nu, r1, r2)


def _turning_legs(surface: RotSymSurface, nu: float, r1: float, r2: float):
    r_min = surface.warp_inv(nu, hi=r1) if surface.warp(r1) > nu else r1
    a1, s1 = _sub_integrals(surface, nu, r_min, r1)
    a2, s2 = _sub_integrals(surface, nu, r_min, r2)
    return a1 + a2, s1 + s2


def distance(surface: RotSymSurface, p: GeoPoint, q: GeoPoint) -> float:
    """Geodesic distance between p and q.

    Constant-curvature surfaces use the law-of-cosines closed form; the
    general case goes through the Clairaut reduction.
    """
    p = GeoPoint.of(*p)
    q = GeoPoint.of(*q)
    if surface.const_kappa is not None:
        return hb.distance(surface.const_kappa, p.r, p.theta, q.r, q.theta)
    return clairaut_distance(surface, p, q)


def clairaut_distance(surface: RotSymSurface, p: GeoPoint, q: GeoPoint) -> float:
    """Geodesic distance by shooting over the Clairaut angular momentum.

    The conserved quantity f(r)^2 theta' reduces the geodesic system to
    one-dimensional quadratures in r; the momentum is found by a root solve
    on the swept angle, with the turning-point branch split handled by the
    substitution r = r_min + u^2.
    """
    p = GeoPoint.of(*p)
    q = GeoPoint.of(*q)
    if max(p.r, q.r) > surface.t_max:
        raise DomainError("point beyond the representable range of the warp")
    dth = hb.angle_gap(p.theta, q.theta)
    r1, r2 = sorted((p.r, q.r))
    if dth == 0.0 or r1 == 0.0:
        return r2 - r1 if dth == 0.0 else r2
    if abs(dth - math.pi) < 1e-15:
        return r1 + r2

    f1 = surface.warp(r1)
    theta_star, len_star = _monotone_leg(surface, f1, r1, r2)

    if dth <= theta_star:
        def gap(nu):
            return _monotone_leg(surface, nu, r1, r2)[0] - dth
        if gap(f1 * 1e-12) > 0:
            nu = f1 * 1e-12
        else:
            nu = brentq(gap, f1 * 1e-12, f1, xtol=1e-15, rtol=8.9e-16, maxiter=200)
        return _monotone_leg(surface, nu, r1, r2)[1]

    def gap_t(nu):
        return _turning_legs(surface, nu, r1, r2)[0] - dth

    nu_lo = f1 * 1e-9
    if gap_t(nu_lo) < 0.0:
        # swept angle below target even for nearly radial momenta: the
        # geodesic is pole-grazing and the through-pole length is exact
        # to well below quadrature tolerance
        return r1 + r2
    nu = brentq(gap_t, nu_lo, f1 * (1.0 - 1e-13), xtol=1e-15, rtol=8.9e-16, maxiter=200)
    return _turning_legs(surface, nu, r1, r2)[1]


def angular_gradient_bound(surface: RotSymSurface, p: GeoPoint) -> float:
    """Upper bound 1/f(r) for the gradient of the polar angle at p.

    On the model surface itself this is the exact gradient magnitude.
    """
    p = GeoPoint.of(*p)
    if p.r == 0.0:
        raise DomainError("angle gradient is singular at the pole")
    if surface.log_warp is not None:
        return math.exp(-surface.log_warp(p.r))
    return 1.0 / surface.warp(p.r)


# ---------------------------------------------------------------------------
# volumes
# ---------------------------------------------------------------------------

def _warp_power_integral(surface: RotSymSurface, k: int, t: float) -> float:
    """integral_0^t f(s)^(k-1) ds, staying in log space for explosive warps."""
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0.0:
        return 0.0
    if t > surface.t_max:
        raise DomainError(f"t={t} beyond representable range {surface.t_max}")
    lw = surface.log_warp
    if lw is not None and (k - 1) * lw(t) > 600.0:
        # trapezoid in log space; the integrand is dominated by the top end
        s = np.linspace(max(t - 80.0, 1e-6), t, 4001)
        logv = np.array([(k - 1) * lw(x) for x in s])
        m = logv.max()
        val = np.trapezoid(np.exp(logv - m), s)
        out = m + math.log(val)
        return math.exp(out) if out < 709 else math.inf
    val, _ = quad(lambda s: surface.warp(s) ** (k - 1), 0.0, t,
                  epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def ball_volume(surface: RotSymSurface, k: int, t: float) -> float:
    """Volume of the geodesic k-ball of radius t around the pole."""
    if not (2 <= k <= surface.dim):
        raise DomainError(f"need 2 <= k <= dim={surface.dim}, got k={k}")
    return k * unit_ball_volume(k) * _warp_power_integral(surface, k, t)


def ball_volume_derivative(surface: RotSymSurface, k: int, t: float) -> float:
    return k * unit_ball_volume(k) * surface.warp(t) ** (k - 1)


def cone_mass(surface: RotSymSurface, gamma_measure: float, k: int, t: float) -> float:
    """Mass within radius t of the radial cone over a set of measure gamma."""
    if gamma_measure <= 0:
        raise DomainError("gamma_measure must be > 0")
    return gamma_measure * _warp_power_integral(surface, k, t)


# ---------------------------------------------------------------------------
# mass-ratio monotonicity and the cone inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassRatioSeries:
    """Sampled mass of a surface piece in pole-centered balls vs ball volume."""

    t_grid: np.ndarray
    mass: np.ndarray
    ball_vol: np.ndarray

    def __post_init__(self):
        if not (len(self.t_grid) == len(self.mass) == len(self.ball_vol)):
            raise DomainError("mass-ratio series needs arrays on a common grid")

    @property
    def ratio(self) -> np.ndarray:
        return np.asarray(self.mass) / np.asarray(self.ball_vol)


def radial_cone_series(surface: RotSymSurface, gamma_measure: float, k: int,
                       t_grid) -> MassRatioSeries:
    t_grid = np.asarray(t_grid, dtype=float)
    mass = np.array([cone_mass(surface, gamma_measure, k, t) for t in t_grid])
    bv = np.array([ball_volume(surface, k, t) for t in t_grid])
    return MassRatioSeries(t_grid=t_grid, mass=mass, ball_vol=bv)


def geodesic_slice_series(t_grid, offset: float = 0.0) -> MassRatioSeries:
    """Totally geodesic plane in hyperbolic 3-space at distance ``offset``
    from the pole, measured against 2-balls: mass 2 pi (cosh t / cosh d0 - 1)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= offset):
        raise DomainError("grid must start beyond the plane offset")
    ch0 = math.cosh(offset)
    mass = 2.0 * math.pi * (np.cosh(t_grid) / ch0 - 1.0)
    bv = 2.0 * math.pi * (np.cosh(t_grid) - 1.0)
    return MassRatioSeries(t_grid=t_grid, mass=mass, ball_vol=bv)


@dataclass(frozen=True)
class MonotonicityReport:
    passed: bool
    max_violation: float
    at_t: Optional[float]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_violation": self.max_violation,
                "at_t": self.at_t}


def monotonicity_check(series: MassRatioSeries, tol: float = 1e-8) -> MonotonicityReport:
    """Largest downward step of the mass ratio over consecutive grid pairs."""
    ratio = series.ratio
    drops = ratio[:-1] - ratio[1:]
    i = int(np.argmax(drops))
    worst = float(max(drops[i], 0.0))
    return MonotonicityReport(
        passed=bool(worst <= tol),
        max_violation=worst,
        at_t=float(series.t_grid[i]) if worst > 0 else None,
    )


@dataclass(frozen=True)
class ConeInequalityReport:
    t: float
    mass: float
    mass_rate: float
    slice_mass: float
    bound: float          # (beta_k / beta_k') * m'(t)
    residual: float       # bound - mass  (>= 0 expected)
    equality_gap: float   # |bound - mass|
    passed: bool

    def to_dict(self) -> dict:
        return {"t": self.t, "mass": self.mass, "bound": self.bound,
                "residual": self.residual, "equality_gap": self.equality_gap,
                "passed": self.passed}


def cone_inequality_check(surface: RotSymSurface, k: int, t: float,
                          slice_mass: float, total_mass_fn: Callable[[float], float],
                          h_fd: float = 1e-5, tol: float = 1e-6) -> ConeInequalityReport:
    """Check m(t) <= (beta_k(t)/beta_k'(t)) m'(t) with m' by central differences."""
    beta = ball_volume(surface, k, t)
    dbeta = ball_volume_derivative(surface, k, t)
    if dbeta == 0.0:
        raise DegenerateProfileError(f"ball volume has zero rate at t={t}")
    m = total_mass_fn(t)
    m_rate = (total_mass_fn(t + h_fd) - total_mass_fn(t - h_fd)) / (2.0 * h_fd)
    bound = beta / dbeta * m_rate
    residual = bound - m
    scale = max(abs(m), abs(bound), 1.0)
    return ConeInequalityReport(
        t=t, mass=m, mass_rate=m_rate, slice_mass=slice_mass,
        bound=bound, residual=residual, equality_gap=abs(residual),
        passed=bool(residual >= -tol * scale),
    )
