import logging
import math

import numpy as np
import pytest

from src import interferometry, quadrature, selftest
from src.errors import NumericalError, ValidationError
from src.interferometry import AliceQuadrupole, ForceProfile, InterferometerSetup
from src.trajectory import kappa


def _at(fn, t):
    return float(np.squeeze(fn(t)))


def test_setup_times(two_level_setup):
    assert two_level_setup.tau_t == 40.0
    assert two_level_setup.tau_e == pytest.approx(20.0 + 10.0 * kappa())


def test_setup_rejects_non_positive_values():
    with pytest.raises(ValidationError):
        InterferometerSetup(m=0.0, d=1.0, D=1.0, tau_a=1.0, tau_f=1.0, sigma=1.0, delta_t=0.0)
    with pytest.raises(ValidationError):
        InterferometerSetup(m=1.0, d=1.0, D=1.0, tau_a=1.0, tau_f=1.0, sigma=1.0, delta_t=-0.1)


def test_large_split_warns(caplog):
    with caplog.at_level(logging.WARNING):
        alice = AliceQuadrupole(Q0=1.0, delta_q=2.0, T=1.0)
    assert "exceeds" in caplog.text
    assert alice.q_minus == -1.0


@pytest.mark.parametrize("factory", [ForceProfile.canonical, ForceProfile.impulse_pair])
def test_profiles_end_at_rest(factory):
    profile = factory(2.0, 0.3, 1.5)
    impulse, displacement = profile.check_integrals(2.0)
    assert abs(impulse) < 1e-8
    assert displacement == pytest.approx(0.3, rel=1e-8)
    path = interferometry.classical_path(profile, 2.0)
    assert _at(path.position, 1.5) == pytest.approx(0.3, rel=1e-8)
    assert abs(_at(path.velocity, 1.5)) < 1e-8


def test_profile_that_does_not_close_is_rejected():
    profile = ForceProfile(force=lambda t: 1.0, tau_a=1.0, d=0.5)
    with pytest.raises(ValidationError):
        profile.check_integrals(1.0)
    with pytest.raises(NumericalError):
        interferometry.classical_path(profile, 1.0)


def test_ramp_profile_by_runge_kutta():
    path = interferometry.classical_path(selftest.ramp_profile(1.0, 0.5, 1.0), 1.0)
    t = np.linspace(0.0, 1.0, 11)
    expected = 6.0 * 0.5 * (t**2 / 2.0 - t**3 / 3.0)
    np.testing.assert_allclose(path.position(t), expected, atol=1e-9)


def test_full_path_is_symmetric():
    opening = interferometry.classical_path(ForceProfile.canonical(1.0, 1.0, 1.0), 1.0)
    path = interferometry.interferometer_path(opening, 2.0)
    assert path.duration == 4.0
    assert _at(path.position, 2.0) == pytest.approx(1.0)
    assert _at(path.position, 0.25) == pytest.approx(_at(path.position, 3.75))
    assert _at(path.velocity, 0.25) == pytest.approx(-_at(path.velocity, 3.75))
    assert _at(path.position, 4.0) == pytest.approx(0.0, abs=1e-12)


def test_zero_force_keeps_branches_together():
    path = interferometry.classical_path(ForceProfile.zero(1.0), 1.0)
    assert interferometry.visibility(0.7, path, 1.0, 1.0) == pytest.approx(1.0)


def test_phase_structure(two_level_setup, alice):
    phases = interferometry.gravitational_phases(two_level_setup, alice)
    assert phases.phi_pp - phases.phi_pm == pytest.approx(phases.Gamma + phases.gamma, abs=1e-12)
    assert phases.phi_mp - phases.phi_mm == pytest.approx(phases.Gamma - phases.gamma, abs=1e-12)
    Gamma, gamma = phases.recovered()
    assert Gamma == pytest.approx(phases.Gamma)
    assert gamma == pytest.approx(phases.gamma)


def test_distinguishing_mass_gives_quarter_turn():
    D, d, tau_e, delta_q = 100.0, 10.0, 30.0, 2.0
    m = interferometry.distinguishing_mass(D, d, tau_e, delta_q)
    gamma = 6.0 * m * tau_e * d * delta_q / D**4
    assert gamma == pytest.approx(math.pi / 2.0)


def test_potential_linearization():
    exact, linear = interferometry.quadrupole_potential(1.0, 100.0, 0.01)
    assert exact == pytest.approx(linear, rel=1e-3)
    with pytest.raises(ValidationError):
        interferometry.quadrupole_potential(1.0, 1.0, -2.0)


def test_single_quantum_bound():
    T = 3.0
    bound = interferometry.graviton_emission_bound(T)
    assert bound == pytest.approx(math.sqrt(2.0 * math.pi) / 8.0 * T**2)


def test_displacement_formula():
    assert interferometry.test_particle_displacement(2.0, 10.0, 5.0) == pytest.approx(3.0 * 25.0 * 2.0 / 1e4)


def test_unitarity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        t = float(rng.uniform(0.0, 2.0))
        m, sigma = rng.uniform(0.5, 2.0, size=2)
        u, u_dot, alpha0 = rng.uniform(-1.0, 1.0, size=3)
        for sign in (1, -1):
            norm = quadrature.integrate_real(
                lambda x: float(np.abs(interferometry.branch_amplitude(t, x, sign, u, u_dot, alpha0, m, sigma)) ** 2),
                -60.0,
                60.0,
                points=[-1.0, 0.0, 1.0],
            )
            assert norm == pytest.approx(1.0, abs=1e-8)


def test_overlap_matches_visibility():
    rng = np.random.default_rng(7)
    for _ in range(50):
        m, sigma = rng.uniform(0.5, 2.0, size=2)
        u, u_dot = rng.uniform(-0.5, 0.5, size=2)
        t = float(rng.uniform(0.0, 0.5))
        overlap = interferometry.overlap_at(t, u, u_dot, m, sigma)
        assert abs(overlap) == pytest.approx(interferometry.visibility_at(t, u, u_dot, m, sigma), abs=1e-8)


def test_visibility_decays_with_separation():
    near = interferometry.visibility_at(0.0, 0.1, 0.0, 1.0, 1.0)
    far = interferometry.visibility_at(0.0, 1.0, 0.0, 1.0, 1.0)
    assert 0.0 < far < near < 1.0


def test_expectation_of_alice_observable():
    assert interferometry.expectation_O("+", 0.8, 0.3) == pytest.approx(1.8)
    assert interferometry.expectation_O("-", 0.8, math.pi / 2.0) == pytest.approx(0.2)
    with pytest.raises(ValidationError):
        interferometry.expectation_O("+", 1.5, 0.0)
    with pytest.raises(ValidationError):
        interferometry.expectation_O("0", 0.5, 0.0)


def test_sigma_factor():
    sigma_star = interferometry.optimal_sigma(2.0, 3.0)
    assert interferometry.sigma_factor(2.0, sigma_star, 3.0) == pytest.approx(2.0)
    assert interferometry.sigma_factor(2.0, 2.0 * sigma_star, 3.0) == pytest.approx(4.25)


def test_averaged_visibility_at_optimal_width():
    m, d, tau_a, delta_t = 1.0, 0.1, 1.0, 0.01
    sigma = interferometry.optimal_sigma(m, tau_a)
    value = interferometry.averaged_visibility(m, d, sigma, tau_a, delta_t)
    assert value == pytest.approx(1.0 - 15.0 * m * d**2 * delta_t / tau_a**2)
    assert interferometry.averaged_visibility(m, d, sigma, tau_a, 0.0) == 1.0


def test_averaged_visibility_warns_for_long_windows(caplog):
    with caplog.at_level(logging.WARNING):
        interferometry.averaged_visibility(1.0, 0.1, 1.0, 1.0, 0.5)
    assert "not small" in caplog.text


def test_time_average_matches_linearization():
    m, d, sigma, tau_a, tau_f = 1.0, 0.1, 1.0, 1.0, 1.0
    opening = interferometry.classical_path(ForceProfile.canonical(m, d, tau_a), m)
    path = interferometry.interferometer_path(opening, tau_f)
    t_end = path.duration

    def deficit_rate(delta_t):
        numeric = interferometry.time_averaged_visibility(path, m, sigma, t_end, delta_t, clock=t_end)
        return (1.0 - numeric) / delta_t

    slope = 2.0 * deficit_rate(5e-4) - deficit_rate(1e-3)
    linear = (1.0 - interferometry.averaged_visibility(m, d, sigma, tau_a, 1e-3, elapsed=t_end)) / 1e-3
    assert slope == pytest.approx(linear, rel=5e-2)


def test_time_resolution():
    assert interferometry.time_resolution_coefficient() == pytest.approx(0.143, rel=2e-3)
    assert interferometry.time_resolution_bound(2.0) == pytest.approx(interferometry.time_resolution_coefficient() / 2.0)
    assert interferometry.required_time_resolution(1.0, 1.0, 1.0) == pytest.approx(1.0 / 15.0)


def test_split_operator_needs_whole_steps():
    x = np.linspace(-5.0, 5.0, 64, endpoint=False)
    with pytest.raises(ValidationError):
        interferometry.split_operator_evolve(np.ones_like(x), x, lambda t: 0.0, 1.0, 0.0105, 1e-3)


def test_split_operator_conserves_norm():
    x = np.linspace(-10.0, 10.0, 256, endpoint=False)
    psi0 = interferometry.free_gaussian(0.0, x, 1.0, 1.0)
    psi = interferometry.split_operator_evolve(psi0, x, lambda t: 0.3, 1.0, 0.5, 1e-2)
    dx = x[1] - x[0]
    assert np.sum(np.abs(psi) ** 2) * dx == pytest.approx(np.sum(np.abs(psi0) ** 2) * dx, rel=1e-12)


@pytest.mark.slow
def test_grid_solver_matches_closed_form():
    assert selftest.grid_wavepacket_error(selftest.ramp_profile(1.0, 0.5, 1.0)) < 1e-4


@pytest.mark.slow
def test_grid_solver_with_piecewise_force():
    assert selftest.grid_wavepacket_error(ForceProfile.impulse_pair(1.0, 0.5, 1.0)) < 1e-4
