"""
feasibility.py

The chain of inequalities that would have to hold together for Alice's
quadrupole choice to signal faster than light through Bob's interferometer,
plus the table of rounded constants recomputed from their derivations.

Failed constraints are reported, never raised.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.interferometry import (
    AliceQuadrupole,
    InterferometerSetup,
    graviton_emission_bound,
    gravitational_phases,
    test_particle_displacement,
    time_resolution_coefficient,
)
from src.quasiatom import (
    bohr_radius_bound,
    bohr_slope,
    charge_coefficient,
    minimum_total_mass,
    phase_energy_coefficient,
    rydberg_fraction_bound,
)
from src.trajectory import kappa, speed_ratio
from src.units import CODATA_2018, PLANCK, UnitSystem

logger = logging.getLogger(__name__)

PARADOX_POSSIBLE = "paradox_possible"
PARADOX_BLOCKED = "paradox_blocked"

CONSTRAINT_ORDER = (
    "alice_causal",
    "bob_causal",
    "graviton_emission",
    "phase_distinguishability",
    "time_resolution",
    "geometry",
)

DEFAULT_TOLERANCE = 5e-3


def _value(x: Any) -> float:
    return float(getattr(x, "value", x))


# ---------------------------------------------------------------------- #
# Report types
# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class InternalEnergies:
    """Ground and excited rest energies of a two-level particle."""

    E0: Any
    E1: Any


@dataclass(frozen=True)
class ConstraintResult:
    name: str
    lhs: Any
    rhs: Any
    relation: str
    satisfied: bool
    margin: float

    @classmethod
    def evaluate(cls, name: str, lhs: Any, relation: str, rhs: Any) -> "ConstraintResult":
        margin = _value(lhs / rhs) if _value(rhs) != 0 else math.inf
        left, right = _value(lhs), _value(rhs)
        satisfied = {"<": left < right, ">": left > right, "<=": left <= right}[relation]
        return cls(name=name, lhs=lhs, rhs=rhs, relation=relation, satisfied=satisfied, margin=margin)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "lhs": _value(self.lhs),
            "rhs": _value(self.rhs),
            "relation": self.relation,
            "satisfied": self.satisfied,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class FeasibilityReport:
    constraints: Tuple[ConstraintResult, ...]
    approximations: Dict[str, float] = field(default_factory=dict)

    @property
    def blocking_constraints(self) -> List[str]:
        return [c.name for c in self.constraints if not c.satisfied]

    @property
    def verdict(self) -> str:
        return PARADOX_POSSIBLE if not self.blocking_constraints else PARADOX_BLOCKED

    def constraint(self, name: str) -> ConstraintResult:
        for result in self.constraints:
            if result.name == name:
                return result
        raise KeyError(name)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "blocking_constraints": self.blocking_constraints,
            "constraints": [c.as_dict() for c in self.constraints],
            "approximations": dict(self.approximations),
        }


# ---------------------------------------------------------------------- #
# Chain
# ---------------------------------------------------------------------- #
def check_ftl_chain(
    setup: InterferometerSetup,
    alice: AliceQuadrupole,
    internal: Optional[InternalEnergies] = None,
    units: UnitSystem = PLANCK,
) -> FeasibilityReport:
    """Evaluate every constraint in order and collect the report.

    The geometry check d ≤ D admits equality: the two-level scenario places
    the arms at the distance of Alice itself.
    """
    c = units.c
    phase_rhs_factor = phase_energy_coefficient() * setup.D / setup.d
    resolution = time_resolution_coefficient()

    results = [
        ConstraintResult.evaluate("alice_causal", c * alice.T, "<", setup.D),
        ConstraintResult.evaluate("bob_causal", c * setup.tau_t, "<", setup.D),
        ConstraintResult.evaluate("graviton_emission", alice.delta_q, "<", graviton_emission_bound(alice.T, units)),
    ]
    approximations: Dict[str, float] = {}
    if internal is None:
        results.append(ConstraintResult.evaluate("phase_distinguishability", setup.m, ">", phase_rhs_factor * units.m_P))
        results.append(ConstraintResult.evaluate("time_resolution", setup.m, "<", resolution * units.m_P))
    else:
        correction = kappa() * (setup.tau_a / setup.tau_f) * internal.E0
        approximations["acceleration_correction_ratio"] = _value(correction / internal.E1)
        results.append(
            ConstraintResult.evaluate(
                "phase_distinguishability", internal.E1 + correction, ">", phase_rhs_factor * units.E_P
            )
        )
        results.append(ConstraintResult.evaluate("time_resolution", internal.E0, "<", resolution * units.E_P))
    # non-strict: the two-level layout puts the arms at d = D, on the boundary
    results.append(ConstraintResult.evaluate("geometry", setup.d, "<=", setup.D))

    phases = gravitational_phases(setup, alice, units)
    approximations["gamma"] = _value(phases.gamma)
    approximations["displacement"] = _value(test_particle_displacement(alice.delta_q, setup.D, setup.tau_f, units))
    report = FeasibilityReport(constraints=tuple(results), approximations=approximations)
    logger.info("feasibility verdict=%s blocking=%s", report.verdict, report.blocking_constraints)
    return report


def sweep(
    setup: InterferometerSetup,
    alice: AliceQuadrupole,
    parameter: str,
    values: Sequence[float],
    internal: Optional[InternalEnergies] = None,
    workers: int = 1,
    units: UnitSystem = PLANCK,
) -> List[Dict[str, Any]]:
    """Re-run the chain with one parameter varied; rows keep the input order.

    `parameter` names a field of the setup, of Alice's quadrupole, or of the
    internal energies.
    """
    def run(value: float) -> Dict[str, Any]:
        s, a, e = setup, alice, internal
        if parameter in {f.name for f in dataclasses.fields(InterferometerSetup)}:
            s = dataclasses.replace(setup, **{parameter: value})
        elif parameter in {f.name for f in dataclasses.fields(AliceQuadrupole)}:
            a = dataclasses.replace(alice, **{parameter: value})
        elif internal is not None and parameter in ("E0", "E1"):
            e = dataclasses.replace(internal, **{parameter: value})
        else:
            raise KeyError(parameter)
        report = check_ftl_chain(s, a, e, units)
        row: Dict[str, Any] = {parameter: value, "verdict": report.verdict}
        row.update({c.name: c.satisfied for c in report.constraints})
        return row

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, values))
    return [run(v) for v in values]


# ---------------------------------------------------------------------- #
# Quadrupole helpers
# ---------------------------------------------------------------------- #
def quadrupole_from_split(M: Any, d: Any) -> Any:
    """ΔQ = ⅔ M d² for a mass moved out to distance d."""
    if _value(M) < 0 or _value(d) < 0:
        raise ValueError("M and d must be non-negative")
    return 2 * M * d**2 / 3


def point_mass_quadrupole(masses: Sequence[float], positions: Sequence[Sequence[float]]) -> np.ndarray:
    """I_ij = Σ m (x_i x_j − δ_ij r²/3) of a set of point masses."""
    tensor = np.zeros((3, 3))
    for m, x in zip(masses, positions):
        x = np.asarray(x, dtype=float)
        tensor += m * (np.outer(x, x) - np.eye(3) * (x @ x) / 3.0)
    return tensor


def split_mass_bound(d: Any, T: Any, units: UnitSystem = PLANCK) -> Any:
    """Largest mass whose ⅔Md² split stays under the single-graviton bound."""
    return 3 * math.sqrt(2 * math.pi) / 16 * units.m_P * (units.c * T / d) ** 2


# ---------------------------------------------------------------------- #
# Derived constants
# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class DerivedConstant:
    name: str
    derived: float
    printed: float
    exact: float
    tolerance: float = DEFAULT_TOLERANCE
    flagged: bool = False

    @property
    def rel_err(self) -> float:
        return abs(self.derived - self.printed) / abs(self.printed)

    @property
    def within_tolerance(self) -> bool:
        return self.rel_err <= self.tolerance

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "derived": self.derived,
            "printed": self.printed,
            "rel_err": self.rel_err,
            "exact": self.exact,
            "tolerance": self.tolerance,
            "flagged": self.flagged,
        }


def derive_constants() -> List[DerivedConstant]:
    """Recompute each printed constant from the printed values upstream of it.

    `derived` follows the printed chain step by step; `exact` carries full
    precision through every step.
    """
    v = speed_ratio()
    alpha_inv = 1.0 / CODATA_2018.fine_structure
    root = math.sqrt(2.0 * math.pi)
    coeff_exact = time_resolution_coefficient()
    r_exact = rydberg_fraction_bound()
    m_exact = minimum_total_mass(r_exact)
    charge_exact = charge_coefficient(r_exact)
    slope_exact = bohr_slope(r_exact, m_exact)

    rows = [
        DerivedConstant("v_max_ratio", v, 1.464, v),
        DerivedConstant("kappa", kappa(), 1.155, kappa()),
        DerivedConstant("subluminal_ratio", 1.0 / 1.464, 0.683, 1.0 / v),
        DerivedConstant("displacement_coefficient", 3.0 * root / 8.0, 0.940, 3.0 * root / 8.0),
        DerivedConstant("time_resolution_coefficient", 1.464**2 / 15.0, 0.143, coeff_exact),
        DerivedConstant("d_over_D", root / (3.0 * 0.143), 5.848, root / (3.0 * coeff_exact), tolerance=2e-3),
        DerivedConstant("inverse_time_resolution", 1.0 / 0.143, 6.993, 1.0 / coeff_exact),
        DerivedConstant("rydberg_fraction", rydberg_fraction_bound(0.143), 0.866, r_exact),
        DerivedConstant("M_min", minimum_total_mass(0.866), 1.066, m_exact),
        DerivedConstant("charge_coefficient", charge_coefficient(0.866, alpha_inv), 13.4, charge_exact),
        DerivedConstant("q_over_e_equal_masses", 13.4 * math.sqrt(2.0), 19.0, charge_exact * math.sqrt(2.0)),
        DerivedConstant("charge_coefficient_squared", 13.4**2, 179.6, charge_exact**2),
        DerivedConstant("bohr_denominator", 179.6 * 1.066, 191.4, charge_exact**2 * m_exact),
        DerivedConstant("bohr_slope", alpha_inv / 191.4, 0.71, slope_exact, tolerance=2e-2),
        DerivedConstant("sqrt_mass_ratio", 1.0 / (alpha_inv / 191.4), 1.4, 1.0 / slope_exact),
        DerivedConstant("mass_ratio", (191.4 / alpha_inv) ** 2, 1.95, 1.0 / slope_exact**2),
        DerivedConstant(
            "bohr_radius_equal_masses",
            alpha_inv / 191.4 * 2.0,
            0.356,
            bohr_radius_bound(4.0).a0,
            flagged=True,
        ),
        DerivedConstant("M_split_bound", 3.0 * root / 16.0, 0.47, 3.0 * root / 16.0),
    ]
    for row in rows:
        if not row.flagged and not row.within_tolerance:
            logger.warning("Constant %s: derived %.6g vs printed %.6g (rel err %.2e)", row.name, row.derived, row.printed, row.rel_err)
    return rows
