"""
selftest.py

Oracle suite: every closed form checked against an independent numerical
evaluation. Each check returns a CheckOutcome; none of them raises on a
mismatch.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from scipy import integrate

from src import graviton, interferometry, quasiatom, radiative, trajectory
from src.errors import GravityChainError
from src.feasibility import PARADOX_POSSIBLE, InternalEnergies, check_ftl_chain, derive_constants, quadrupole_from_split
from src.quasiatom import OrbitalLabel
from src.units import (
    CODATA_2018,
    ENERGY,
    LENGTH,
    MASS,
    QUADRUPOLE,
    SPEED,
    TIME,
    PhysicalQuantity,
    dim_check,
    from_planck,
    to_planck,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str
    seconds: float

    def as_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "seconds": round(self.seconds, 3)}


# ---------------------------------------------------------------------- #
# Grid oracle
# ---------------------------------------------------------------------- #
def ramp_profile(m: float, d: float, tau_a: float) -> interferometry.ForceProfile:
    """F(t) = 6md(τ_a − 2t)/τ_a³: a linear ramp that ends at rest at d."""
    scale = 6.0 * m * d / tau_a**3
    return interferometry.ForceProfile(force=lambda t: scale * (tau_a - 2.0 * t), tau_a=tau_a, d=d)


def grid_wavepacket_error(
    profile: interferometry.ForceProfile,
    m: float = 1.0,
    sigma: float = 1.0,
    box: float = 20.0,
    points: int = 1024,
    dt: float = 1e-3,
) -> float:
    """L² distance between |ψ₊| from the closed form and from the FFT grid solver at t = τ_a."""
    x = np.linspace(-box / 2.0, box / 2.0, points, endpoint=False)
    path = interferometry.classical_path(profile, m)
    psi0 = interferometry.free_gaussian(0.0, x, m, sigma)
    numeric = interferometry.split_operator_evolve(psi0, x, profile.force, m, profile.tau_a, dt, sign=1)
    analytic = interferometry.wavepacket(profile.tau_a, x, "+", path, m, sigma)
    return float(np.sqrt(np.sum((np.abs(numeric) - np.abs(analytic)) ** 2) * (x[1] - x[0])))


# ---------------------------------------------------------------------- #
# Checks
# ---------------------------------------------------------------------- #
def _close(value: float, target: float, rel: float) -> Tuple[bool, str]:
    err = abs(value - target) / abs(target)
    return err <= rel, f"{value:.12g} vs {target:.12g} (rel {err:.2e})"


def check_minimum_action(rng: np.random.Generator) -> Tuple[bool, str]:
    return _close(trajectory.s_functional(trajectory.OPTIMAL), trajectory.S_MIN, 1e-7)


def check_family_closed_form(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for a in (-6.0, trajectory.OPTIMAL_A, -1.0, 0.0, 1.0, 3.0):
        member = trajectory.TrajectoryFamilyParam(a)
        closed = trajectory.s_closed_form(a)
        worst = max(worst, abs(trajectory.s_functional(member) - closed) / closed)
    return worst <= 1e-7, f"max rel err {worst:.2e}"


def check_energy_identity(rng: np.random.Generator) -> Tuple[bool, str]:
    delta_q, T = rng.uniform(0.5, 2.0, size=2)
    direct = trajectory.radiated_energy(delta_q, T, trajectory.s_functional(trajectory.OPTIMAL))
    return _close(direct, trajectory.min_radiated_energy(delta_q, T), 1e-9)


def check_single_quantum(rng: np.random.Generator) -> Tuple[bool, str]:
    T = float(rng.uniform(0.5, 2.0))
    bound = interferometry.graviton_emission_bound(T)
    return _close(trajectory.min_radiated_energy(bound, T), 2.0 * math.pi / T, 1e-12)


def check_kinematics(rng: np.random.Generator) -> Tuple[bool, str]:
    ok_v, detail_v = _close(trajectory.speed_ratio(), 1.464, 5e-3)
    ok_k, detail_k = _close(trajectory.kappa(), 1.155, 5e-3)
    return ok_v and ok_k, f"v_max {detail_v}; kappa {detail_k}"


def check_radial_dipole(rng: np.random.Generator) -> Tuple[bool, str]:
    return _close(quasiatom.radial_dipole_integral(), quasiatom.DIPOLE_RADIAL, 1e-10)


def check_angular_dipole(rng: np.random.Generator) -> Tuple[bool, str]:
    return _close(quasiatom.angular_dipole_factor(), quasiatom.DIPOLE_ANGULAR, 1e-10)


def check_volume_dipole(rng: np.random.Generator) -> Tuple[bool, str]:
    value = quasiatom.volume_matrix_element(OrbitalLabel(1, 0, 0), OrbitalLabel(2, 1, 0), lambda x, y, z: z)
    return _close(abs(value), quasiatom.DIPOLE_COEFF, 1e-8)


def check_graviton_selection(rng: np.random.Generator) -> Tuple[bool, str]:
    s, p0 = OrbitalLabel(1, 0, 0), OrbitalLabel(2, 1, 0)
    worst = max(abs(graviton.quadrupole_matrix_element(s, p0, graviton.GWPolarization.along_z(k))) for k in ("+", "x"))
    phi_err = max(
        abs(graviton.phi_selection_quadrature(n, which) - graviton.phi_selection_integral(n, which))
        for n in range(-3, 4)
        for which in ("cos", "sin")
    )
    return worst <= 1e-10 and phi_err <= 1e-12, f"|<1s|e|2p0>| {worst:.1e}; phi integrals {phi_err:.1e}"


def check_quadrupole_paths(rng: np.random.Generator) -> Tuple[bool, str]:
    s, d2 = OrbitalLabel(1, 0, 0), OrbitalLabel(3, 2, 2)
    pol = graviton.GWPolarization.along_z("+")
    numeric = graviton.quadrupole_matrix_element(s, d2, pol, method="quadrature")
    exact = graviton.quadrupole_matrix_element(s, d2, pol, method="analytic")
    err = abs(numeric - exact) / abs(exact)
    return err <= 1e-8, f"{abs(exact):.10g} (rel {err:.1e})"


def check_tensor_identity(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = max(graviton.tensor_identity_residual(rng.normal(size=3)) for _ in range(20))
    return worst <= 1e-12, f"max residual {worst:.1e}"


def check_overlap(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for _ in range(10):
        m, sigma = rng.uniform(0.5, 2.0, size=2)
        u, u_dot = rng.uniform(-0.5, 0.5, size=2)
        t = float(rng.uniform(0.0, 0.1))
        numeric = abs(interferometry.overlap_at(t, u, u_dot, m, sigma))
        worst = max(worst, abs(numeric - interferometry.visibility_at(t, u, u_dot, m, sigma)))
    return worst <= 1e-8, f"max |Δ| {worst:.1e}"


def check_grid_wavepacket(rng: np.random.Generator) -> Tuple[bool, str]:
    error = grid_wavepacket_error(ramp_profile(1.0, 0.5, 1.0))
    return error < 1e-4, f"L2 error {error:.2e}"


def check_first_order(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for _ in range(5):
        omega_ab, omega = rng.uniform(0.5, 3.0, size=2)
        t = float(rng.uniform(1.0, 20.0))
        closed = graviton.first_order_amplitude_raw(omega_ab, omega, t, 1.0)
        numeric = graviton.first_order_amplitude_numeric(omega_ab, omega, t, 1.0)
        worst = max(worst, abs(closed - numeric) / max(1.0, abs(closed)))
    return worst <= 1e-10, f"max |Δ| {worst:.1e}"


def check_dyson_rate(rng: np.random.Generator) -> Tuple[bool, str]:
    numeric, closed = graviton.band_rate_oracle()
    return _close(numeric, closed, 2e-2)


def check_photon_ratios(rng: np.random.Generator) -> Tuple[bool, str]:
    bad = [n for n in (1, 2, 10, 1000, 10**6) if radiative.rate_ratios(n) != (n + 1, n)]
    return not bad, "exact" if not bad else f"mismatch at n={bad}"


def check_constants(rng: np.random.Generator) -> Tuple[bool, str]:
    misses = [row.name for row in derive_constants() if not row.flagged and not row.within_tolerance]
    return not misses, "all within tolerance" if not misses else f"out of tolerance: {', '.join(misses)}"


def check_brute_force(rng: np.random.Generator) -> Tuple[bool, str]:
    _, best = trajectory.brute_force_minimize(5, n_restarts=8, seed=0)
    return abs(best - trajectory.S_MIN) <= 1e-4, f"best S {best:.8f}"


def check_effective_time(rng: np.random.Generator) -> Tuple[bool, str]:
    tau_f, tau_a = rng.uniform(0.5, 20.0, size=2)
    sampled = trajectory.optimal_trajectory(1.0, 1.0, 4001)
    weight = 2.0 * integrate.simpson(sampled.positions, x=sampled.times)
    return _close(trajectory.effective_time(tau_f, tau_a), tau_f + weight * tau_a, 1e-6)


def check_potential_linearization(rng: np.random.Generator) -> Tuple[bool, str]:
    Q, D = rng.uniform(0.5, 2.0), rng.uniform(50.0, 200.0)
    dx = 1e-4 * D
    exact, linear = interferometry.quadrupole_potential(Q, D, dx)
    # next order is −6 dx²/D² against 3 dx/D
    return _close(exact, linear, 3.0 * dx / D)


def check_classical_path(rng: np.random.Generator) -> Tuple[bool, str]:
    d = float(rng.uniform(0.2, 1.0))
    path = interferometry.classical_path(ramp_profile(1.0, d, 1.0), 1.0)
    t = np.linspace(0.0, 1.0, 21)
    worst = float(np.max(np.abs(path.position(t) - 6.0 * d * (t**2 / 2.0 - t**3 / 3.0))))
    return worst <= 1e-9, f"max |Δu| {worst:.1e}"


def check_measurement_window(rng: np.random.Generator) -> Tuple[bool, str]:
    m, tau_a = rng.uniform(0.5, 3.0, size=2)
    sigma_star = interferometry.optimal_sigma(m, tau_a)
    ok_s, detail_s = _close(interferometry.sigma_factor(m, sigma_star, tau_a), 2.0, 1e-12)
    ok_c, detail_c = _close(interferometry.time_resolution_coefficient(), 0.143, 2e-3)
    ok_t, detail_t = _close(interferometry.time_resolution_bound(m) * m, interferometry.time_resolution_coefficient(), 1e-12)
    return ok_s and ok_c and ok_t, f"sigma factor {detail_s}; coefficient {detail_c}; bound {detail_t}"


def check_averaged_visibility(rng: np.random.Generator) -> Tuple[bool, str]:
    m, d, sigma, tau_a, tau_f = 1.0, 0.1, 1.0, 1.0, 1.0
    opening = interferometry.classical_path(interferometry.ForceProfile.canonical(m, d, tau_a), m)
    path = interferometry.interferometer_path(opening, tau_f)
    t_end = path.duration

    def deficit_rate(delta_t: float) -> float:
        numeric = interferometry.time_averaged_visibility(path, m, sigma, t_end, delta_t, clock=t_end)
        return (1.0 - numeric) / delta_t

    slope = 2.0 * deficit_rate(5e-4) - deficit_rate(1e-3)
    linear = (1.0 - interferometry.averaged_visibility(m, d, sigma, tau_a, 1e-3, elapsed=t_end)) / 1e-3
    return _close(slope, linear, 5e-2)


def check_alice_observable(rng: np.random.Generator) -> Tuple[bool, str]:
    A, gamma = float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.0, math.pi))
    plus = interferometry.expectation_O("+", A, gamma)
    minus = interferometry.expectation_O("-", A, gamma)
    ok = abs(plus - (1.0 + A)) <= 1e-15 and abs((plus - minus) - A * (1.0 - math.cos(2.0 * gamma))) <= 1e-12
    return ok, f"<O>+ {plus:.6f}, <O>- {minus:.6f}"


def check_levels(rng: np.random.Generator) -> Tuple[bool, str]:
    m1, m2, q = rng.uniform(0.2, 2.0, size=3)
    params = quasiatom.QuasiatomParams(m1, m2, q)
    E0, E1 = quasiatom.energy_levels(params)
    ok_gap, detail_gap = _close(E1 - E0, 0.75 * params.E_R, 1e-12)
    ratio = float(rng.uniform(1.0, 10.0))
    report = quasiatom.bohr_radius_bound(ratio)
    ok_a0, detail_a0 = _close(report.a0, math.sqrt(ratio) * quasiatom.bohr_slope(), 1e-10)
    return ok_gap and ok_a0, f"gap {detail_gap}; a0 {detail_a0}"


def check_stability_window(rng: np.random.Generator) -> Tuple[bool, str]:
    gamma = float(rng.uniform(0.1, 1.0))
    # natural lifetime 10 τ_f and absorption time τ_a / 10
    tau_f, tau_a = 0.1 / gamma, 10.0 / (4.0 * gamma)
    setup = interferometry.InterferometerSetup(m=1.0, d=1.0, D=10.0, tau_a=tau_a, tau_f=tau_f, sigma=1.0, delta_t=0.0)
    window = radiative.stability_window(setup, radiative.stimulated_rates(gamma, 4))
    ok_life, detail_life = _close(window.lifetime_margin, 10.0, 1e-12)
    ok_abs, detail_abs = _close(window.absorption_margin, 10.0, 1e-12)
    return ok_life and ok_abs and window.passed, f"lifetime {detail_life}; absorption {detail_abs}"


def check_graviton_coupling(rng: np.random.Generator) -> Tuple[bool, str]:
    omega, V = rng.uniform(0.5, 4.0, size=2)
    ok_h, detail_h = _close(graviton.strain_amplitude(omega, V) ** 2 * V * omega, 16.0 * math.pi, 1e-12)
    table_ok = all(
        graviton.selection_rule(l_i, l_f).allowed == (abs(l_i - l_f) == 2) for l_i in range(5) for l_f in range(5)
    )
    return ok_h and table_ok, f"strain {detail_h}; selection table {'exact' if table_ok else 'wrong'}"


def check_second_order(rng: np.random.Generator) -> Tuple[bool, str]:
    params = quasiatom.QuasiatomParams(1.0, 1.0, 1.0)
    s, d2, alpha = OrbitalLabel(1, 0, 0), OrbitalLabel(3, 2, 2), OrbitalLabel(4, 0)
    omega_ab = float(graviton.transition_frequency(params, alpha, s))
    omega_gb = float(graviton.transition_frequency(params, d2, s))
    omega1 = 0.1
    rate = graviton.second_order_rate(alpha, [d2], s, omega1, omega_ab - omega1, 100.0, params)
    pol = graviton.GWPolarization.along_z("+")
    a0 = float(params.a0)
    expected = graviton.single_state_rate(
        graviton.quadrupole_matrix_element(alpha, d2, pol, a0),
        graviton.quadrupole_matrix_element(d2, s, pol, a0),
        -omega_gb,
        omega_gb - omega_ab,
        omega_gb,
        100.0,
        float(params.mu),
        float(params.M),
    )
    return _close(rate, expected, 1e-12)


def check_feasibility_chain(rng: np.random.Generator) -> Tuple[bool, str]:
    alice = interferometry.AliceQuadrupole(Q0=1.0, delta_q=1.0, T=50.0)
    arms = dict(D=100.0, tau_a=10.0, tau_f=20.0, sigma=1.0, delta_t=0.5)
    two_level = check_ftl_chain(
        interferometry.InterferometerSetup(m=1.0, d=100.0, **arms), alice, InternalEnergies(E0=0.1, E1=1.0)
    )
    rest_mass = check_ftl_chain(interferometry.InterferometerSetup(m=0.1, d=50.0, **arms), alice)
    ok = two_level.verdict == PARADOX_POSSIBLE and rest_mass.blocking_constraints == ["phase_distinguishability"]
    return ok, f"two-level {two_level.verdict}; rest mass blocked by {rest_mass.blocking_constraints}"


def check_split_quadrupole(rng: np.random.Generator) -> Tuple[bool, str]:
    M, d = rng.uniform(0.1, 5.0, size=2)
    r = np.array([0.0, 0.0, d])
    traceless = M * (np.outer(r, r) - np.eye(3) * (r @ r) / 3.0)
    return _close(quadrupole_from_split(M, d), traceless[2, 2], 1e-12)


def check_unit_conversion(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for dim in (MASS, LENGTH, TIME, ENERGY, QUADRUPOLE):
        value = float(rng.uniform(1e-3, 1e3))
        back = from_planck(to_planck(PhysicalQuantity(value, dim)))
        worst = max(worst, abs(back.value - value) / value)
    one = to_planck(PhysicalQuantity(CODATA_2018.m_P, MASS)).value
    dims_ok = dim_check(PhysicalQuantity(1.0, ENERGY), PhysicalQuantity(1.0, MASS * SPEED**2)) and not dim_check(
        PhysicalQuantity(1.0, MASS), PhysicalQuantity(1.0, ENERGY)
    )
    return worst <= 1e-14 and abs(one - 1.0) <= 1e-15 and dims_ok, f"round trip {worst:.1e}; m_P -> {one!r}"


CHECKS: List[Tuple[str, Callable[[np.random.Generator], Tuple[bool, str]]]] = [
    ("minimum_action", check_minimum_action),
    ("family_closed_form", check_family_closed_form),
    ("energy_identity", check_energy_identity),
    ("single_quantum", check_single_quantum),
    ("kinematics", check_kinematics),
    ("radial_dipole", check_radial_dipole),
    ("angular_dipole", check_angular_dipole),
    ("volume_dipole", check_volume_dipole),
    ("graviton_selection", check_graviton_selection),
    ("quadrupole_paths", check_quadrupole_paths),
    ("tensor_identity", check_tensor_identity),
    ("overlap", check_overlap),
    ("grid_wavepacket", check_grid_wavepacket),
    ("first_order", check_first_order),
    ("dyson_rate", check_dyson_rate),
    ("photon_ratios", check_photon_ratios),
    ("constants", check_constants),
    ("brute_force", check_brute_force),
    ("effective_time", check_effective_time),
    ("potential_linearization", check_potential_linearization),
    ("classical_path", check_classical_path),
    ("measurement_window", check_measurement_window),
    ("averaged_visibility", check_averaged_visibility),
    ("alice_observable", check_alice_observable),
    ("levels", check_levels),
    ("stability_window", check_stability_window),
    ("graviton_coupling", check_graviton_coupling),
    ("second_order", check_second_order),
    ("feasibility_chain", check_feasibility_chain),
    ("split_quadrupole", check_split_quadrupole),
    ("unit_conversion", check_unit_conversion),
]


def run_check(name: str, check: Callable[[np.random.Generator], Tuple[bool, str]], seed: int = 0) -> CheckOutcome:
    start = time.perf_counter()
    try:
        passed, detail = check(np.random.default_rng(seed))
    except GravityChainError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    outcome = CheckOutcome(name, passed, detail, time.perf_counter() - start)
    logger.info("%-20s %s  %s", name, "PASS" if passed else "FAIL", detail)
    return outcome


def run_all(seed: int = 0) -> List[CheckOutcome]:
    return [run_check(name, check, seed) for name, check in CHECKS]
