import pytest

from src.interferometry import AliceQuadrupole, InterferometerSetup


@pytest.fixture
def two_level_setup():
    """Arms at Alice's distance; the mass slot holds the excited energy E1."""
    return InterferometerSetup(m=1.0, d=100.0, D=100.0, tau_a=10.0, tau_f=20.0, sigma=1.0, delta_t=0.5)


@pytest.fixture
def rest_mass_setup():
    return InterferometerSetup(m=0.1, d=50.0, D=100.0, tau_a=10.0, tau_f=20.0, sigma=1.0, delta_t=0.5)


@pytest.fixture
def alice():
    return AliceQuadrupole(Q0=1.0, delta_q=1.0, T=50.0)
