import math

import pytest

from radialgeo.jacobi import solve_jacobi
from radialgeo.profiles import DataC, catalog_lookup
from radialgeo.sc import ScParams
from radialgeo.surfaces import RotSymSurface


@pytest.fixture(scope="session")
def lp_profile():
    return catalog_lookup("log-pinched", eps=1.0, eps_tilde=0.5, r_star=10.0)


@pytest.fixture(scope="session")
def lp_sol(lp_profile):
    return solve_jacobi(lp_profile.a, 1.2e5, rtol=1e-11)


@pytest.fixture(scope="session")
def lp_data(lp_profile):
    return DataC(profile=lp_profile, t1=math.e**2, eps=1.0, eps_tilde=0.5, c1=2.0)


@pytest.fixture(scope="session")
def lp_params():
    return ScParams(eps=1.0, eps_tilde=0.5, eps1=0.75, alpha=0.2, lam=0.75, t0=1.0)


@pytest.fixture(scope="session")
def const_profile():
    return catalog_lookup("constant", k=1.0)


@pytest.fixture(scope="session")
def const_sol(const_profile):
    return solve_jacobi(const_profile.a, 60.0, rtol=1e-11)


@pytest.fixture(scope="session")
def superexp_profile():
    return catalog_lookup("superexp", c=1.0, eps=0.1)


@pytest.fixture(scope="session")
def superexp_sol(superexp_profile):
    return solve_jacobi(superexp_profile.a, 62.0, rtol=1e-11)


@pytest.fixture(scope="session")
def flat_profile():
    return catalog_lookup("euclidean")


@pytest.fixture(scope="session")
def flat_sol(flat_profile):
    return solve_jacobi(flat_profile.a, 30.0, rtol=1e-11)


@pytest.fixture(scope="session")
def hyp_surface():
    return RotSymSurface.hyperbolic()


@pytest.fixture(scope="session")
def hyp_surface_general():
    """sinh warp with the constant-curvature fast path disabled, so the
    Clairaut machinery is exercised and can be checked against closed forms."""
    return RotSymSurface(
        warp=math.sinh, dwarp=math.cosh, ksq=lambda r: 1.0,
        const_kappa=None,
        log_warp=lambda r: math.log(math.sinh(r)) if 0 < r < 20
        else (r - math.log(2.0) if r >= 20 else -math.inf),
        u_warp=lambda r: 1.0 / math.tanh(r),
        label="sinh (general path)",
    )


@pytest.fixture(scope="session")
def flat_surface():
    return RotSymSurface.euclidean()
