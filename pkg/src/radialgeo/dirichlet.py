"""Spectral exhaustion solver for the Laplacian on rotationally symmetric
surfaces.

Separation of variables turns the Dirichlet problem on a disk of radius R
into radial two-point problems per Fourier mode:

    phi'' + (f'/f) phi' - (n^2/f^2) phi = 0,   phi regular at 0, phi(R) = 1.

The regular solution behaves like r^n at the pole and can grow fast, so
the solver carries v = phi'/phi (a Riccati equation) and log phi, exactly
like the comparison-solution machinery.  Solving over an increasing
sequence of radii and tracking the per-mode profiles exhibits whether
boundary data at infinity is attained (profiles converge to 1 outward, as
under fast curvature decay) or lost (flat case: (r/R)^n goes to 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationFailure
from .surfaces import RotSymSurface

SERIES_R0 = 1e-3
ATTAIN_THRESHOLD = 1e-3  # attained means the profile ends within this of 1


@dataclass(frozen=True)
class BoundaryData:
    """Finite Fourier data on the circle at infinity."""

    modes: Tuple[Tuple[int, float, float], ...]  # (n, cos coeff, sin coeff)

    @staticmethod
    def of(*modes: Tuple[int, float, float]) -> "BoundaryData":
        seen = set()
        for n, _, _ in modes:
            if n < 0:
                raise DomainError("mode index must be >= 0")
            if n in seen:
                raise DomainError(f"duplicate mode {n}")
            seen.add(n)
        return BoundaryData(modes=tuple((int(n), float(a), float(b)) for n, a, b in modes))

    def evaluate(self, theta: float) -> float:
        return sum(a * math.cos(n * theta) + b * math.sin(n * theta)
                   for n, a, b in self.modes)

    @property
    def sup_norm(self) -> float:
        thetas = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
        vals = np.zeros_like(thetas)
        for n, a, b in self.modes:
            vals += a * np.cos(n * thetas) + b * np.sin(n * thetas)
        return float(np.max(np.abs(vals)))


@dataclass(frozen=True)
class ModeProfile:
    """Radial factor phi_n on [0, R], normalized to phi_n(R) = 1."""

    n: int
    R: float
    ksq0: float
    log_phi_r0: float
    log_phi_R: float
    _dense: object = None

    def log_phi_raw(self, r: float) -> float:
        """Unnormalized log phi (the integration constant is arbitrary)."""
        if r < 0 or r > self.R * (1 + 1e-12):
            raise DomainError(f"r={r} outside [0, {self.R}]")
        if self.n == 0:
            return 0.0
        if r == 0.0:
            return -math.inf
        if r < SERIES_R0:
            return (self.log_phi_r0 + self.n * math.log(r / SERIES_R0)
                    - self.ksq0 * self.n * (r * r - SERIES_R0**2) / 12.0)
        return float(self._dense(r)[1])

    def __call__(self, r: float) -> float:
        if self.n == 0:
            return 1.0
        if r == 0.0:
            return 0.0
        return math.exp(self.log_phi_raw(r) - self.log_phi_R)

    def values(self, r_grid) -> np.ndarray:
        return np.array([self(float(r)) for r in np.asarray(r_grid, dtype=float)])


def solve_mode(surface: RotSymSurface, n: int, R: float, rtol: float = 1e-10) -> ModeProfile:
    """Regular mode-n radial profile with phi(R) = 1.

    The pole is entered through the series phi ~ r^n (1 - ksq(0) n r^2/12 ...),
    i.e. v = phi'/phi = n/r - ksq(0) n r / 6, then v and log phi are carried
    by a stiffness-switching integrator.
    """
    if n < 0:
        raise DomainError("mode index must be >= 0")
    if R <= SERIES_R0 * 10:
        raise DomainError(f"R too small, need R > {SERIES_R0 * 10}")
    if R > surface.t_max:
        raise DomainError(f"R={R} beyond representable range {surface.t_max}")
    ksq0 = surface.ksq(0.0)
    if n == 0:
        return ModeProfile(n=0, R=R, ksq0=ksq0, log_phi_r0=0.0, log_phi_R=0.0)

    f = surface.warp
    if surface.u_warp is not None:
        fof = surface.u_warp
    else:
        fof = lambda r: surface.dwarp(r) / f(r)
    if surface.log_warp is not None:
        inv_f2 = lambda r: math.exp(-2.0 * surface.log_warp(r))
    else:
        inv_f2 = lambda r: 1.0 / f(r) ** 2

    r0 = SERIES_R0
    v0 = n / r0 - ksq0 * n * r0 / 6.0
    lp0 = -ksq0 * n * r0 * r0 / 12.0  # relative to n log(r0), folded into log_phi_r0

    def rhs(r, y):
        v = y[0]
        return (n * n * inv_f2(r) - v * v - fof(r) * v, v)

    sol = solve_ivp(rhs, (r0, R), (v0, lp0), method="LSODA",
                    rtol=rtol, atol=(1e-13, 1e-13), dense_output=True)
    if not sol.success:
        raise IntegrationFailure(f"mode {n} integration failed at r={sol.t[-1]}: "
                                 f"{sol.message}", last_t=float(sol.t[-1]))
    return ModeProfile(
        n=n, R=R, ksq0=ksq0,
        log_phi_r0=lp0, log_phi_R=float(sol.sol(R)[1]), _dense=sol.sol,
    )


@dataclass(frozen=True)
class ModeVerdict:
    n: int
    converged: bool
    max_profile_change: float
    end_value: float
    attainment: str  # attained | not-attained | inconclusive


@dataclass(frozen=True)
class HarmonicSolution:
    """Exhaustion record: per-mode profiles over nested disks and verdicts."""

    surface: RotSymSurface
    data: BoundaryData
    radii: Tuple[float, ...]
    profiles: dict            # n -> list of ModeProfile, one per radius
    verdicts: List[ModeVerdict]
    rtol: float

    def limit_profile(self, n: int) -> ModeProfile:
        return self.profiles[n][-1]

    def u_at(self, r: float, theta: float) -> float:
        """Assembled solution on the largest disk."""
        total = 0.0
        for n, a, b in self.data.modes:
            total += self.limit_profile(n)(r) * (a * math.cos(n * theta)
                                                 + b * math.sin(n * theta))
        return total

    def max_principle_gap(self, n_r: int = 40, n_theta: int = 64) -> float:
        """sup over samples of |u| minus the boundary sup norm (<= 0 expected)."""
        R = self.radii[-1]
        worst = 0.0
        for r in np.linspace(0.0, R, n_r):
            for th in np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False):
                worst = max(worst, abs(self.u_at(float(r), float(th))))
        return worst - self.data.sup_norm

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "modes": [
                {"n": v.n, "converged": v.converged,
                 "max_profile_change": v.max_profile_change,
                 "end_value": v.end_value, "attained": v.attainment}
                for v in self.verdicts
            ],
        }


DETACH_THRESHOLD = 0.9  # "visibly converges to a constant < 1" cutoff


def _attainment(end_window: np.ndarray, window_means: list) -> str:
    """Classify a mode from its end window and its nested-disk history.

    ``attained`` when the final profile sits within 1e-3 of 1 on the end
    window.  ``not-attained`` when the sequence of window means over the
    exhaustion extrapolates (geometrically, Aitken) to a limit visibly
    detached from 1 -- the flat-space signature, where the means keep
    shrinking by a fixed factor.  Slowly attaining profiles (means creeping
    up toward 1 with vanishing decrements) stay ``inconclusive`` rather
    than being misread as lost boundary values.
    """
    if np.min(end_window) >= 1.0 - ATTAIN_THRESHOLD:
        return "attained"
    if len(window_means) >= 3:
        m1, m2, m3 = window_means[-3], window_means[-2], window_means[-1]
        d2, d3 = m2 - m1, m3 - m2
        if abs(d3 - d2) > 1e-14:
            limit = m3 - d3 * d3 / (d3 - d2)
            steady = d2 != 0 and 0.0 <= d3 / d2 <= 0.9
            if steady and limit <= DETACH_THRESHOLD:
                return "not-attained"
    return "inconclusive"


def exhaust(
    surface: RotSymSurface,
    data: BoundaryData,
    radii: Sequence[float],
    rtol: float = 1e-10,
) -> HarmonicSolution:
    """Solve every mode on each disk of the exhaustion and judge attainment.

    A mode counts as converged when consecutive profiles agree to 10*rtol
    on the previous disk.  Attainment is judged on the final 20 percent of
    the second-largest disk (the largest is boundary-pinned to 1 there, so
    it carries no information): profile within 1e-3 of 1 means attained,
    uniformly below that band means not attained.  Numerical evidence, not
    proof, in both directions.
    """
    radii = tuple(float(R) for R in radii)
    if len(radii) < 2:
        raise DomainError("exhaustion needs at least two radii")
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise DomainError("radii must be strictly increasing")

    profiles: dict = {}
    verdicts: List[ModeVerdict] = []
    r_eval = radii[-2]
    probe = np.linspace(0.8 * radii[0], radii[0], 64)  # inside every disk
    for n, _, _ in data.modes:
        seq = [solve_mode(surface, n, R, rtol=rtol) for R in radii]
        profiles[n] = seq
        grid_prev = np.linspace(0.0, radii[-2], 256)
        change = float(np.max(np.abs(seq[-1].values(grid_prev)
                                     - seq[-2].values(grid_prev))))
        converged = change <= 10.0 * rtol
        window = np.linspace(0.8 * r_eval, r_eval, 64)
        end_vals = seq[-1].values(window)
        window_means = [float(np.mean(m.values(probe))) for m in seq]
        verdicts.append(ModeVerdict(
            n=n, converged=converged, max_profile_change=change,
            end_value=float(end_vals[-1]),
            attainment=_attainment(end_vals, window_means),
        ))
    return HarmonicSolution(
        surface=surface, data=data, radii=radii,
        profiles=profiles, verdicts=verdicts, rtol=rtol,
    )
