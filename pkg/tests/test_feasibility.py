import dataclasses
import math

import numpy as np
import pytest

from src import feasibility
from src.feasibility import (
    PARADOX_BLOCKED,
    PARADOX_POSSIBLE,
    ConstraintResult,
    InternalEnergies,
    check_ftl_chain,
)
from src.interferometry import AliceQuadrupole, time_resolution_coefficient
from src.quasiatom import phase_energy_coefficient

TWO_LEVEL = InternalEnergies(E0=0.1, E1=1.0)


def _first_flip(rows, key):
    for previous, row in zip(rows, rows[1:]):
        if previous[key] != row[key]:
            return row
    raise AssertionError(f"{key} never changes")


def test_two_level_particle_allows_the_paradox(two_level_setup, alice):
    report = check_ftl_chain(two_level_setup, alice, TWO_LEVEL)
    assert report.verdict == PARADOX_POSSIBLE
    assert report.blocking_constraints == []
    assert [c.name for c in report.constraints] == list(feasibility.CONSTRAINT_ORDER)
    assert report.approximations["acceleration_correction_ratio"] < 0.1


def test_rest_mass_particle_is_blocked(rest_mass_setup, alice):
    report = check_ftl_chain(rest_mass_setup, alice)
    assert report.verdict == PARADOX_BLOCKED
    assert report.blocking_constraints == ["phase_distinguishability"]
    assert report.constraint("time_resolution").satisfied


def test_report_serialization(two_level_setup, alice):
    data = check_ftl_chain(two_level_setup, alice, TWO_LEVEL).as_dict()
    assert data["verdict"] == PARADOX_POSSIBLE
    assert {"gamma", "displacement"} <= set(data["approximations"])
    assert data["constraints"][0]["name"] == "alice_causal"
    with pytest.raises(KeyError):
        check_ftl_chain(two_level_setup, alice, TWO_LEVEL).constraint("warp")


def test_slow_alice_breaks_causality(two_level_setup):
    report = check_ftl_chain(two_level_setup, AliceQuadrupole(Q0=1.0, delta_q=1.0, T=150.0), TWO_LEVEL)
    assert "alice_causal" in report.blocking_constraints


def test_large_split_radiates_a_graviton(two_level_setup):
    report = check_ftl_chain(two_level_setup, AliceQuadrupole(Q0=1e4, delta_q=1e4, T=50.0), TWO_LEVEL)
    assert report.blocking_constraints == ["graviton_emission"]


def test_geometry_admits_equality(two_level_setup, alice):
    assert check_ftl_chain(two_level_setup, alice, TWO_LEVEL).constraint("geometry").satisfied
    wider = dataclasses.replace(two_level_setup, d=100.5)
    assert not check_ftl_chain(wider, alice, TWO_LEVEL).constraint("geometry").satisfied


def test_phase_margin_falls_with_distance(rest_mass_setup, alice):
    margins = [
        check_ftl_chain(dataclasses.replace(rest_mass_setup, D=D), alice).constraint("phase_distinguishability").margin
        for D in (60.0, 100.0, 200.0, 400.0)
    ]
    assert margins == sorted(margins, reverse=True)


def test_constraint_result():
    result = ConstraintResult.evaluate("x", 2.0, "<", 4.0)
    assert result.satisfied and result.margin == 0.5
    assert not ConstraintResult.evaluate("x", 4.0, "<", 4.0).satisfied
    assert ConstraintResult.evaluate("x", 4.0, "<=", 4.0).satisfied
    assert ConstraintResult.evaluate("x", 1.0, ">", 0.0).margin == math.inf


def test_mass_sweep_flips_time_resolution(rest_mass_setup, alice):
    values = np.linspace(0.1, 0.2, 10_000)
    rows = feasibility.sweep(rest_mass_setup, alice, "m", values)
    flip = _first_flip(rows, "time_resolution")
    step = values[1] - values[0]
    assert abs(flip["m"] - time_resolution_coefficient()) <= step
    assert flip["m"] == pytest.approx(0.143, rel=2e-3)


def test_separation_sweep_flips_phase_column(alice):
    m = time_resolution_coefficient() * (1.0 - 1e-6)
    D = 10.0
    setup = feasibility.InterferometerSetup(m=m, d=50.0, D=D, tau_a=1.0, tau_f=2.0, sigma=1.0, delta_t=0.0)
    ratios = np.linspace(5.0, 7.0, 10_000)
    rows = feasibility.sweep(setup, alice, "d", ratios * D)
    flip = _first_flip(rows, "phase_distinguishability")
    step = (ratios[1] - ratios[0]) * D
    assert abs(flip["d"] - D * phase_energy_coefficient() / m) <= step
    assert flip["d"] / D == pytest.approx(5.848, rel=2e-3)


def test_energy_sweep_flips_verdict(two_level_setup, alice):
    values = np.linspace(0.1, 0.2, 10_000)
    rows = feasibility.sweep(two_level_setup, alice, "E0", values, TWO_LEVEL)
    assert rows[0]["verdict"] == PARADOX_POSSIBLE
    assert rows[-1]["verdict"] == PARADOX_BLOCKED
    flip = _first_flip(rows, "verdict")
    assert abs(flip["E0"] - time_resolution_coefficient()) <= values[1] - values[0]


def test_sweep_keeps_order_with_workers(two_level_setup, alice):
    values = [0.05, 0.3, 0.1, 0.2]
    serial = feasibility.sweep(two_level_setup, alice, "E0", values, TWO_LEVEL)
    threaded = feasibility.sweep(two_level_setup, alice, "E0", values, TWO_LEVEL, workers=3)
    assert serial == threaded
    assert [row["E0"] for row in threaded] == values


def test_sweep_unknown_parameter(two_level_setup, alice):
    with pytest.raises(KeyError):
        feasibility.sweep(two_level_setup, alice, "colour", [1.0])


def test_quadrupole_helpers():
    assert feasibility.quadrupole_from_split(3.0, 2.0) == pytest.approx(8.0)
    tensor = feasibility.point_mass_quadrupole([1.0, 2.0], [(1.0, 0.0, 0.0), (0.0, 1.0, 1.0)])
    assert np.trace(tensor) == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(tensor, tensor.T)
    assert feasibility.split_mass_bound(2.0, 2.0) == pytest.approx(3.0 * math.sqrt(2.0 * math.pi) / 16.0)
    with pytest.raises(ValueError):
        feasibility.quadrupole_from_split(-1.0, 1.0)


def test_split_at_the_mass_bound_saturates_the_graviton_bound():
    from src.interferometry import graviton_emission_bound

    d, T = 3.0, 5.0
    M = feasibility.split_mass_bound(d, T)
    assert feasibility.quadrupole_from_split(M, d) == pytest.approx(graviton_emission_bound(T))


def test_derived_constants_table():
    rows = {row.name: row for row in feasibility.derive_constants()}
    for row in rows.values():
        if not row.flagged:
            assert row.within_tolerance, row.as_dict()
    assert 5.843 <= rows["d_over_D"].exact <= 5.848
    assert rows["displacement_coefficient"].derived == pytest.approx(3.0 * math.sqrt(2.0 * math.pi) / 8.0, rel=1e-12)
    assert rows["bohr_radius_equal_masses"].flagged
    assert not rows["bohr_radius_equal_masses"].within_tolerance
    for name in ("time_resolution_coefficient", "inverse_time_resolution", "rydberg_fraction", "M_min",
                 "charge_coefficient", "q_over_e_equal_masses", "mass_ratio", "M_split_bound"):
        assert name in rows


def test_single_point_sweep_matches_direct_report(rest_mass_setup, alice):
    (row,) = feasibility.sweep(rest_mass_setup, alice, "m", [rest_mass_setup.m])
    report = check_ftl_chain(rest_mass_setup, alice)
    assert row["verdict"] == report.verdict
    assert {name: row[name] for name in feasibility.CONSTRAINT_ORDER} == {
        c.name: c.satisfied for c in report.constraints
    }
