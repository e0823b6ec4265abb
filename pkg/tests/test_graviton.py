import logging
import math

import numpy as np
import pytest

from src import graviton, quasiatom
from src.errors import PoleError, ValidationError
from src.graviton import GWPolarization
from src.quasiatom import OrbitalLabel, QuasiatomParams

S1 = OrbitalLabel(1, 0, 0)
P0 = OrbitalLabel(2, 1, 0)
D_PLUS2 = OrbitalLabel(3, 2, 2)


def test_strain_amplitude():
    assert graviton.strain_amplitude(2.0, 8.0) == pytest.approx(math.sqrt(16.0 * math.pi / 16.0))
    with pytest.raises(ValidationError):
        graviton.strain_amplitude(-1.0, 1.0)


@pytest.mark.parametrize("kind", ["+", "x"])
def test_polarization_invariants(kind):
    pol = GWPolarization.along((0.3, -0.4, 0.8), kind, angle=0.6)
    assert max(pol.invariant_residuals().values()) < 1e-12


def test_polarization_rejects_traced_tensor():
    with pytest.raises(ValidationError):
        GWPolarization(e=np.eye(3), k_hat=np.array([0.0, 0.0, 1.0]), kind="+")
    with pytest.raises(ValidationError):
        GWPolarization.along((0.0, 0.0, 1.0), kind="o")


def test_unit_tensor_identity():
    rng = np.random.default_rng(11)
    for _ in range(25):
        assert graviton.tensor_identity_residual(rng.normal(size=3)) < 1e-12


@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_unit_tensors_reproduce_harmonics(m):
    theta, phi = 1.1, 0.4
    r_hat = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    expected = complex(quasiatom.spherical_harmonic(2, m, theta, phi))
    assert graviton.UNIT_TENSORS[m](r_hat) == pytest.approx(expected, abs=1e-12)


def test_unit_tensor_range():
    with pytest.raises(ValidationError):
        graviton.spherical_unit_tensor(3)


@pytest.mark.parametrize("kind", ["+", "x"])
def test_no_single_graviton_s_to_p(kind):
    pol = GWPolarization.along_z(kind)
    assert abs(graviton.quadrupole_matrix_element(S1, P0, pol)) < 1e-10
    assert abs(graviton.quadrupole_matrix_element(S1, P0, pol, method="analytic")) < 1e-10


@pytest.mark.parametrize("kind", ["+", "x"])
def test_quadrature_and_gaunt_paths_agree(kind):
    pol = GWPolarization.along_z(kind)
    numeric = graviton.quadrupole_matrix_element(S1, D_PLUS2, pol)
    exact = graviton.quadrupole_matrix_element(S1, D_PLUS2, pol, method="analytic")
    assert abs(exact) > 0.5
    assert abs(numeric - exact) < 1e-8 * abs(exact)


def test_hermiticity():
    pol = GWPolarization.along((1.0, 1.0, 1.0), "+", angle=0.3)
    forward = graviton.quadrupole_matrix_element(S1, OrbitalLabel(3, 2, 1), pol)
    backward = graviton.quadrupole_matrix_element(OrbitalLabel(3, 2, 1), S1, pol)
    assert abs(forward - np.conj(backward)) < 1e-10


def test_unknown_matrix_element_method():
    with pytest.raises(ValidationError):
        graviton.quadrupole_matrix_element(S1, D_PLUS2, GWPolarization.along_z(), method="guess")


def test_phi_selection_integrals():
    assert graviton.phi_selection_integral(2, "cos") == pytest.approx(math.pi)
    assert graviton.phi_selection_integral(-2, "cos") == pytest.approx(math.pi)
    assert graviton.phi_selection_integral(2, "sin") == pytest.approx(1j * math.pi)
    assert graviton.phi_selection_integral(-2, "sin") == pytest.approx(-1j * math.pi)
    for n in range(-4, 5):
        for which in ("cos", "sin"):
            numeric = graviton.phi_selection_quadrature(n, which)
            assert abs(numeric - graviton.phi_selection_integral(n, which)) < 1e-12
    with pytest.raises(ValidationError):
        graviton.phi_selection_integral(2, "tan")


def test_selection_table():
    for l_i in range(5):
        for l_f in range(5):
            assert graviton.selection_rule(l_i, l_f).allowed == (abs(l_i - l_f) == 2)
    assert "electromagnetically allowed" in graviton.selection_rule(0, 1).note
    with pytest.raises(ValidationError):
        graviton.selection_rule(-1, 1)


def test_first_order_closed_form_against_quadrature():
    rng = np.random.default_rng(5)
    for _ in range(10):
        omega_ab, omega = rng.uniform(0.2, 3.0, size=2)
        t = float(rng.uniform(0.5, 30.0))
        closed = graviton.first_order_amplitude_raw(omega_ab, omega, t, 0.7 + 0.2j)
        numeric = graviton.first_order_amplitude_numeric(omega_ab, omega, t, 0.7 + 0.2j)
        assert abs(closed - numeric) < 1e-10 * max(1.0, abs(closed))


def test_first_order_on_resonance_grows_linearly():
    early = abs(graviton.first_order_amplitude_raw(1.0, 1.0, 100.0, 1.0))
    late = abs(graviton.first_order_amplitude_raw(1.0, 1.0, 200.0, 1.0))
    assert late / early == pytest.approx(2.0, rel=2e-2)


def test_first_order_amplitude_on_quasiatom():
    params = QuasiatomParams(1.0, 1.0, 1.0)
    omega = float(graviton.transition_frequency(params, D_PLUS2, S1))
    assert omega == pytest.approx(0.25 * 8.0 / 9.0)
    assert abs(graviton.first_order_amplitude(P0, S1, omega, 10.0, 100.0, params)) < 1e-12
    assert abs(graviton.first_order_amplitude(D_PLUS2, S1, omega, 10.0, 100.0, params)) > 0.0


def test_second_order_closed_form_against_nested_quadrature():
    args = dict(omega_ab=2.0, omega_gb=1.3, w1=0.4, w2=0.9j, omega1=1.0, omega2=1.1, t=40.0)
    closed = graviton.second_order_amplitude_raw(**args)
    numeric = graviton.second_order_amplitude_numeric(**args)
    assert abs(numeric - closed) < 1e-6 * abs(closed)


def test_second_order_pole_is_rejected():
    with pytest.raises(PoleError):
        graviton.second_order_amplitude_raw(2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 10.0)
    with pytest.raises(PoleError):
        graviton.density_of_states_rate(1.0, 1.0, 1.0, 1.0, 100.0)


def test_intermediate_basis():
    assert len(graviton.intermediate_states(2)) == 5
    assert len(graviton.intermediate_states(3)) == 14


def test_second_order_rate_off_resonance(caplog):
    params = QuasiatomParams(1.0, 1.0, 1.0)
    with caplog.at_level(logging.WARNING):
        rate = graviton.second_order_rate(OrbitalLabel(4, 0), [D_PLUS2], S1, 0.1, 0.1, 100.0, params)
    assert rate == 0.0
    assert "off resonance" in caplog.text


def test_second_order_rate_through_one_level():
    params = QuasiatomParams(1.0, 1.0, 1.0)
    alpha = OrbitalLabel(4, 0)
    omega_ab = float(graviton.transition_frequency(params, alpha, S1))
    omega_gb = float(graviton.transition_frequency(params, D_PLUS2, S1))
    omega1 = 0.1
    omega2 = omega_ab - omega1
    rate = graviton.second_order_rate(alpha, [D_PLUS2], S1, omega1, omega2, 100.0, params)
    pol = GWPolarization.along_z("+")
    a0 = float(params.a0)
    expected = graviton.single_state_rate(
        graviton.quadrupole_matrix_element(alpha, D_PLUS2, pol, a0),
        graviton.quadrupole_matrix_element(D_PLUS2, S1, pol, a0),
        -omega_gb,
        omega_gb - omega_ab,
        omega_gb,
        100.0,
        float(params.mu),
        float(params.M),
    )
    assert rate > 0.0
    assert rate == pytest.approx(expected, rel=1e-12)
    continuum = graviton.second_order_rate(alpha, [D_PLUS2], S1, omega1, omega2, 100.0, params, density=50.0)
    assert continuum > 0.0


def test_second_order_rate_pole():
    params = QuasiatomParams(1.0, 1.0, 1.0)
    alpha = OrbitalLabel(4, 0)
    omega_ab = float(graviton.transition_frequency(params, alpha, S1))
    omega1 = float(graviton.transition_frequency(params, D_PLUS2, S1))
    with pytest.raises(PoleError):
        graviton.second_order_rate(alpha, graviton.intermediate_states(3), S1, omega1, omega_ab - omega1, 100.0, params)


@pytest.mark.slow
def test_band_sum_converges_to_constant_rate():
    numeric, closed = graviton.band_rate_oracle()
    assert numeric == pytest.approx(closed, rel=2e-2)


def test_resolve_second_order_transition():
    params = QuasiatomParams(1.0, 1.0, 1.0)
    alpha = OrbitalLabel(4, 0)
    omega_ab = float(graviton.transition_frequency(params, alpha, S1))
    omega1 = 0.1
    transition = graviton.resolve_transition(
        S1, alpha, omega1, 50.0, 100.0, params, intermediate=D_PLUS2, omega2=omega_ab - omega1
    )
    assert transition.order == 2
    assert transition.rate == pytest.approx(
        graviton.second_order_rate(alpha, [D_PLUS2], S1, omega1, omega_ab - omega1, 100.0, params), rel=1e-12
    )
    assert transition.probability > 0.0


def test_resolve_transition_rate_needs_energy_matching(caplog):
    params = QuasiatomParams(1.0, 1.0, 1.0)
    with caplog.at_level(logging.WARNING):
        transition = graviton.resolve_transition(
            S1, OrbitalLabel(4, 0), 0.1, 50.0, 100.0, params, intermediate=D_PLUS2, omega2=0.1
        )
    assert transition.rate == 0.0


def test_resolve_first_order_transition():
    params = QuasiatomParams(1.0, 1.0, 1.0)
    transition = graviton.resolve_transition(S1, D_PLUS2, 0.2, 10.0, 100.0, params)
    assert transition.order == 1 and transition.rate is None
    assert transition.amplitude == graviton.first_order_amplitude(D_PLUS2, S1, 0.2, 10.0, 100.0, params)
    with pytest.raises(ValidationError):
        graviton.resolve_transition(S1, D_PLUS2, 0.2, 10.0, 100.0, params, intermediate=OrbitalLabel(2, 0))
