"""
radiative.py

Photon emission and absorption rates of the two-level particle: occupation
factors, the spontaneous rate in two prefactor conventions, lifetimes,
mode-resolved golden-rule coefficients and the check that the excited
state outlives the free flight while it can still be pumped during the
acceleration phase.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from src.errors import ValidationError
from src.interferometry import InterferometerSetup
from src.units import PLANCK, UnitSystem

logger = logging.getLogger(__name__)

RESONANCE_RTOL = 1e-9


def _value(x: Any) -> float:
    return float(getattr(x, "value", x))


@dataclass(frozen=True)
class FieldMode:
    omega: Any
    n_photons: int
    polarization: Tuple[float, float, float]
    V: Any

    def __post_init__(self) -> None:
        if not _value(self.omega) > 0 or not _value(self.V) > 0:
            raise ValidationError("Field mode needs ω > 0 and V > 0")
        if self.n_photons < 0:
            raise ValidationError(f"n_photons must be non-negative, got {self.n_photons}")
        if abs(np.linalg.norm(self.polarization) - 1.0) > 1e-12:
            raise ValidationError("Polarization must be a unit vector")


@dataclass(frozen=True)
class TransitionRates:
    gamma_emission: Any
    gamma_absorption: Any
    gamma_spontaneous: Any

    def __post_init__(self) -> None:
        if _value(self.gamma_emission) < _value(self.gamma_spontaneous):
            raise ValidationError("Emission rate cannot fall below the spontaneous rate")

    @property
    def lifetime(self) -> Any:
        """Excited-state lifetime against (stimulated plus spontaneous) emission."""
        return lifetime(self.gamma_emission) if _value(self.gamma_emission) > 0 else math.inf

    @property
    def absorption_time(self) -> Any:
        return 1 / self.gamma_absorption if _value(self.gamma_absorption) > 0 else math.inf

    @property
    def spontaneous_lifetime(self) -> Any:
        """Natural lifetime 1/Γ_spo, the decay time once the drive is off."""
        return lifetime(self.gamma_spontaneous) if _value(self.gamma_spontaneous) > 0 else math.inf


@dataclass(frozen=True)
class StabilityWindow:
    stable: bool
    excitable: bool
    lifetime_margin: float
    absorption_margin: float

    @property
    def passed(self) -> bool:
        return self.stable and self.excitable


# ---------------------------------------------------------------------- #
# Rates
# ---------------------------------------------------------------------- #
def rate_ratios(n_photons: int) -> Tuple[int, int]:
    """Occupation factors (n + 1, n) of emission and absorption."""
    if n_photons < 0:
        raise ValidationError(f"n_photons must be non-negative, got {n_photons}")
    return n_photons + 1, n_photons


def spontaneous_rate_total(omega: Any, dipole_magnitude: Any, q: Any, units: UnitSystem = PLANCK) -> Any:
    """Total spontaneous rate ω³ q² |r|² / (2π ε₀ ħ c³), prefactor as printed."""
    if not _value(omega) > 0:
        raise ValidationError("omega must be positive")
    return 2 * units.k_e * omega**3 * q**2 * dipole_magnitude**2 / (units.hbar * units.c**3)


def einstein_a(omega: Any, dipole_magnitude: Any, q: Any, units: UnitSystem = PLANCK) -> Any:
    """Textbook spontaneous rate 4 k ω³ q² |r|² / (3 ħ c³)."""
    if not _value(omega) > 0:
        raise ValidationError("omega must be positive")
    return 4 * units.k_e * omega**3 * q**2 * dipole_magnitude**2 / (3 * units.hbar * units.c**3)


def transverse_basis(k_hat: Any, angle: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair perpendicular to k_hat, rotated by `angle` about it."""
    k = np.asarray(k_hat, dtype=float)
    k = k / np.linalg.norm(k)
    helper = np.array([1.0, 0.0, 0.0]) if abs(k[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(k, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(k, e1)
    c, s = math.cos(angle), math.sin(angle)
    return c * e1 + s * e2, -s * e1 + c * e2


def spontaneous_angular_rate(
    omega: float,
    dipole: Any,
    k_hat: Any,
    angle: float = 0.0,
    units: UnitSystem = PLANCK,
) -> float:
    """dΓ/dΩ = ω³/(8π² ε₀ ħ c³) Σ_pol |ε*·d|² for emission along k_hat."""
    d = np.asarray(dipole, dtype=complex)
    total = sum(abs(np.vdot(e, d)) ** 2 for e in transverse_basis(k_hat, angle))
    return omega**3 * total / (8.0 * math.pi**2 * units.epsilon_0 * units.hbar * units.c**3)


def lifetime(rate: Any) -> Any:
    """τ = 1/Γ."""
    if not _value(rate) > 0:
        raise ValidationError(f"Rate must be positive, got {_value(rate)!r}")
    return 1 / rate


def _on_resonance(omega: Optional[float], omega_fi: Optional[float]) -> bool:
    if omega is None or omega_fi is None:
        return True
    if abs(omega - omega_fi) <= RESONANCE_RTOL * abs(omega_fi):
        return True
    logger.warning("Drive ω=%g is off the transition frequency ω_fi=%g; stimulated rates set to zero", omega, omega_fi)
    return False


def stimulated_rates(
    gamma_spontaneous: Any,
    n_photons: int,
    omega: Optional[float] = None,
    omega_fi: Optional[float] = None,
) -> TransitionRates:
    """Emission (n+1)Γ and absorption nΓ in a mode holding n photons."""
    emission, absorption = rate_ratios(n_photons)
    if not _on_resonance(omega, omega_fi):
        emission, absorption = 1, 0
    return TransitionRates(
        gamma_emission=emission * gamma_spontaneous,
        gamma_absorption=absorption * gamma_spontaneous,
        gamma_spontaneous=gamma_spontaneous,
    )


def mode_rate_coefficient(
    mode: FieldMode,
    momentum_element: Any,
    q: float,
    mu: float,
    process: str = "emission",
    convention: str = "standard",
    omega_fi: Optional[float] = None,
    units: UnitSystem = PLANCK,
) -> float:
    """Golden-rule weight of the δ(E_f − E_i ± ħω) term for one field mode.

    The standard form is π q² |ε·p_fi|² n_occ / (ε₀ μ² ω V); the verbatim
    form carries the additional ω_fi² factor as printed.
    """
    if process not in ("emission", "absorption"):
        raise ValidationError(f"Unknown process {process!r}")
    if convention not in ("standard", "verbatim"):
        raise ValidationError(f"Unknown convention {convention!r}")
    emission, absorption = rate_ratios(mode.n_photons)
    occupation = emission if process == "emission" else absorption
    projection = abs(np.vdot(np.asarray(mode.polarization, dtype=float), np.asarray(momentum_element, dtype=complex))) ** 2
    coefficient = math.pi * q**2 * projection * occupation / (units.epsilon_0 * mu**2 * mode.omega * mode.V)
    if convention == "verbatim":
        if omega_fi is None:
            raise ValidationError("The verbatim convention needs omega_fi")
        coefficient *= omega_fi**2
    return coefficient


# ---------------------------------------------------------------------- #
# Stability
# ---------------------------------------------------------------------- #
def stability_window(setup: InterferometerSetup, rates: TransitionRates) -> StabilityWindow:
    """Excited state must outlive τ_f and be reachable by absorption within τ_a.

    The flight after the absorption window runs without the pump, so the
    lifetime side uses the natural lifetime 1/Γ_spo; the stimulated lifetime
    stays on ``rates.lifetime`` for reporting.

    Margins are ratios, not differences: lifetime_margin = (1/Γ_spo)/τ_f and
    absorption_margin = τ_a/(1/Γ_abs). A ratio of exactly one is the
    zero-margin boundary and fails. With no spontaneous decay the lifetime
    margin is infinite; with no absorption the absorption margin is zero.
    """
    life = rates.spontaneous_lifetime
    absorption_time = rates.absorption_time
    lifetime_margin = math.inf if _value(life) == math.inf else _value(life / setup.tau_f)
    absorption_margin = 0.0 if _value(absorption_time) == math.inf else _value(setup.tau_a / absorption_time)
    return StabilityWindow(
        stable=lifetime_margin > 1.0,
        excitable=absorption_margin > 1.0,
        lifetime_margin=lifetime_margin,
        absorption_margin=absorption_margin,
    )
