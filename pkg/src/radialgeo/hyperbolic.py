"""Closed forms for constant-curvature planes in polar coordinates.

The curvature -kappa^2 plane (kappa = 0 gives the flat plane) supports an
exact distance, exponential map, and geodesic-spreading factor.  These are
the fast paths for surfaces whose warping function is sinh(kappa r)/kappa
or r, and the oracles the general machinery is tested against.
"""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize to [0, 2*pi)."""
    t = math.fmod(theta, TWO_PI)
    return t + TWO_PI if t < 0 else t


def angle_gap(t1: float, t2: float) -> float:
    """Absolute angular separation in [0, pi]."""
    d = abs(wrap_angle(t1) - wrap_angle(t2))
    return TWO_PI - d if d > math.pi else d


def _acosh1p(s: float) -> float:
    """arccosh(1 + s) for s >= 0, accurate for small s."""
    if s < 0:
        s = 0.0
    return math.log1p(s + math.sqrt(s * (s + 2.0)))


def distance(kappa: float, r1: float, t1: float, r2: float, t2: float) -> float:
    """Geodesic distance between polar points on the curvature -kappa^2 plane."""
    dth = angle_gap(t1, t2)
    if kappa == 0.0:
        # (r1-r2)^2 + 4 r1 r2 sin^2(dth/2), stable near coincident points
        s = math.sin(dth / 2.0)
        return math.hypot(r1 - r2, 2.0 * math.sqrt(r1 * r2) * s) if r1 * r2 >= 0 else 0.0
    x1, x2 = kappa * r1, kappa * r2
    # cosh(kd) - 1 = (cosh(x1-x2) - 1) + sinh x1 sinh x2 (1 - cos dth)
    s = (math.cosh(x1 - x2) - 1.0) + math.sinh(x1) * math.sinh(x2) * (
        2.0 * math.sin(dth / 2.0) ** 2
    )
    return _acosh1p(s) / kappa


def exp_map(kappa: float, r: float, theta: float, psi: float, s: float):
    """Point reached from (r, theta) after arc length s.

    ``psi`` is the launch angle measured from the outward radial direction,
    counterclockwise.  Returns polar coordinates (rho, theta_out).
    """
    if s == 0.0:
        return r, theta
    if r == 0.0:
        return s, wrap_angle(theta + psi)
    if kappa == 0.0:
        ca, sa = math.cos(theta), math.sin(theta)
        dx = math.cos(psi) * ca - math.sin(psi) * sa
        dy = math.cos(psi) * sa + math.sin(psi) * ca
        x = r * ca + s * dx
        y = r * sa + s * dy
        return math.hypot(x, y), wrap_angle(math.atan2(y, x))
    x_r, x_s = kappa * r, kappa * s
    ch = math.cosh(x_r) * math.cosh(x_s) + math.sinh(x_r) * math.sinh(x_s) * math.cos(psi)
    rho = _acosh1p(ch - 1.0) / kappa
    if rho == 0.0:
        return 0.0, 0.0
    # angle at the pole between the two radii
    num = math.cosh(x_r) * math.cosh(kappa * rho) - math.cosh(x_s)
    den = math.sinh(x_r) * math.sinh(kappa * rho)
    c = max(-1.0, min(1.0, num / den)) if den > 0 else 1.0
    dth = math.acos(c)
    return rho, wrap_angle(theta + math.copysign(dth, math.sin(psi)))


def spreading(kappa: float, s: float) -> float:
    """Jacobian of the exponential map at arc length s (area element factor)."""
    if kappa == 0.0:
        return s
    return math.sinh(kappa * s) / kappa
