"""
quasiatom.py

Hydrogen-like bound state of two charged masses used as Bob's two-level
particle: spectrum, wavefunctions, Bohr radius and electric dipole matrix
elements, plus the charge and size requirements that follow from the
interferometer bounds.

The centre-of-mass Hamiltonian and the term quadratic in the vector
potential are dropped; only the relative-coordinate problem is modelled.
"""

from __future__ import annotations

import functools
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Tuple

import numpy as np
from scipy import special

from src import quadrature
from src.errors import ValidationError
from src.interferometry import time_resolution_coefficient
from src.units import CODATA_2018, PLANCK, SI, UnitSystem, sqrt

logger = logging.getLogger(__name__)

RADIAL_EXTENT = 40.0
DIPOLE_RADIAL = 64.0 * math.sqrt(24.0) / 243.0
DIPOLE_ANGULAR = 1.0 / math.sqrt(3.0)
DIPOLE_COEFF = 128.0 * math.sqrt(2.0) / 243.0

_SPECTROSCOPIC = "spdfghik"


# ---------------------------------------------------------------------- #
# Parameters and labels
# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class QuasiatomParams:
    """Two masses m1, m2 bound by charges ±q."""

    m1: Any
    m2: Any
    q: Any
    units: UnitSystem = field(default=PLANCK, compare=False, repr=False)

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "q"):
            value = getattr(self, name)
            if not float(getattr(value, "value", value)) > 0:
                raise ValidationError(f"{name} must be positive")

    @classmethod
    def hydrogen(cls, units: UnitSystem = SI) -> "QuasiatomParams":
        return cls(units.m_proton, units.m_electron, units.e, units)

    @property
    def M(self) -> Any:
        return self.m1 + self.m2

    @property
    def mu(self) -> Any:
        return self.m1 * self.m2 / self.M

    @property
    def E_R(self) -> Any:
        """Rydberg energy k²q⁴μ / (2ħ²)."""
        return self.units.k_e**2 * self.q**4 * self.mu / (2 * self.units.hbar**2)

    @property
    def a0(self) -> Any:
        """Bohr radius ħ² / (k μ q²)."""
        return self.units.hbar**2 / (self.units.k_e * self.mu * self.q**2)

    @property
    def E0(self) -> Any:
        return self.M * self.units.c**2 - self.E_R

    @property
    def E1(self) -> Any:
        return self.M * self.units.c**2 - self.E_R / 4

    def summary(self) -> Dict[str, float]:
        def plain(x: Any) -> float:
            return float(getattr(x, "value", x))

        return {
            "M": plain(self.M),
            "mu": plain(self.mu),
            "E_R": plain(self.E_R),
            "a0": plain(self.a0),
            "E0": plain(self.E0),
            "E1": plain(self.E1),
            "dipole_coeff": DIPOLE_COEFF,
        }


@dataclass(frozen=True)
class OrbitalLabel:
    n: int
    l: int
    m: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or not 0 <= self.l < self.n or abs(self.m) > self.l:
            raise ValidationError(f"Invalid orbital (n={self.n}, l={self.l}, m={self.m})")
        if self.n > 3:
            logger.debug("Orbital n=%d beyond n=3 is evaluated by the generic recurrence", self.n)

    @property
    def name(self) -> str:
        letter = _SPECTROSCOPIC[self.l] if self.l < len(_SPECTROSCOPIC) else f"[l={self.l}]"
        if self.l == 0:
            return f"{self.n}{letter}"
        return f"{self.n}{letter}{self.m:+d}" if self.m else f"{self.n}{letter}0"

    @classmethod
    def parse(cls, label: str) -> "OrbitalLabel":
        """Parse labels such as '1s', '2p0', '2p+1', '3d-2'."""
        match = re.fullmatch(r"(\d+)([a-z])([+-]?\d+)?", label.strip())
        if not match or match.group(2) not in _SPECTROSCOPIC:
            raise ValidationError(f"Unknown orbital label {label!r}")
        return cls(int(match.group(1)), _SPECTROSCOPIC.index(match.group(2)), int(match.group(3) or 0))


# ---------------------------------------------------------------------- #
# Wavefunctions
# ---------------------------------------------------------------------- #
@functools.lru_cache(maxsize=None)
def _radial_parts(n: int, l: int, a0: float) -> Tuple[float, np.poly1d, float]:
    """R_nl(r) = norm · poly(r) · exp(−r · decay)."""
    scale = 2.0 / (n * a0)
    norm = math.sqrt(scale**3 * math.factorial(n - l - 1) / (2.0 * n * math.factorial(n + l)))
    laguerre = special.genlaguerre(n - l - 1, 2 * l + 1)
    rho = np.poly1d([scale, 0.0])
    poly = rho**l * np.poly1d(laguerre.coeffs)(rho)
    return norm, poly, 1.0 / (n * a0)


def radial_function(n: int, l: int, r: Any, a0: float = 1.0) -> np.ndarray:
    norm, poly, decay = _radial_parts(n, l, float(a0))
    r = np.asarray(r, dtype=float)
    return norm * poly(r) * np.exp(-decay * r)


def radial_derivative(n: int, l: int, r: Any, a0: float = 1.0) -> np.ndarray:
    norm, poly, decay = _radial_parts(n, l, float(a0))
    r = np.asarray(r, dtype=float)
    return norm * (poly.deriv()(r) - decay * poly(r)) * np.exp(-decay * r)


def spherical_harmonic(l: int, m: int, theta: Any, phi: Any) -> np.ndarray:
    """Y_l^m with the Condon–Shortley phase."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if m < 0:
        return (-1) ** (-m) * np.conj(spherical_harmonic(l, -m, theta, phi))
    norm = math.sqrt((2 * l + 1) / (4.0 * math.pi) * math.factorial(l - m) / math.factorial(l + m))
    return norm * special.lpmv(m, l, np.cos(theta)) * np.exp(1j * m * phi)


def wavefunction(orbital: OrbitalLabel, r: Any, theta: Any, phi: Any, a0: float = 1.0) -> np.ndarray:
    """Normalized hydrogenic eigenfunction ψ_nlm(r, θ, φ)."""
    if np.any(np.asarray(r) < 0):
        raise ValidationError("r must be non-negative")
    return radial_function(orbital.n, orbital.l, r, a0) * spherical_harmonic(orbital.l, orbital.m, theta, phi)


# ---------------------------------------------------------------------- #
# Integrals
# ---------------------------------------------------------------------- #
def radial_matrix_element(bra: Tuple[int, int], ket: Tuple[int, int], power: int = 1, a0: float = 1.0) -> float:
    """∫₀^∞ R_bra R_ket r^(2+power) dr, truncated at 40·n·a0."""
    upper = RADIAL_EXTENT * max(bra[0], ket[0]) * a0
    return quadrature.integrate_real(
        lambda r: float(radial_function(*bra, r, a0) * radial_function(*ket, r, a0)) * r ** (2 + power),
        0.0,
        upper,
    )


def radial_dipole_integral() -> float:
    """∫ R_1s ρ R_2p ρ² dρ in units of the Bohr radius (64√24/243)."""
    return radial_matrix_element((1, 0), (2, 1), power=1)


def gamma_five() -> float:
    """∫₀^∞ x⁴ e^{−x} dx, the integral behind the radial dipole value."""
    return quadrature.integrate_real(lambda x: math.exp(4.0 * math.log(x) - x) if x > 0.0 else 0.0, 0.0, math.inf)


def angular_dipole_factor(bra: Tuple[int, int] = (0, 0), ket: Tuple[int, int] = (1, 0), nodes: int = 32) -> float:
    """⟨Y_bra| cos θ |Y_ket⟩ by Gauss–Legendre in cos θ and a uniform φ rule."""
    for l, m in (bra, ket):
        if l < 0 or abs(m) > l:
            raise ValidationError(f"Invalid angular label (l={l}, m={m})")
    x, w = np.polynomial.legendre.leggauss(nodes)
    phi = np.linspace(0.0, 2.0 * math.pi, 2 * nodes, endpoint=False)
    theta = np.arccos(x)[:, None]
    integrand = np.conj(spherical_harmonic(*bra, theta, phi)) * x[:, None] * spherical_harmonic(*ket, theta, phi)
    value = np.sum(w[:, None] * integrand) * (2.0 * math.pi / phi.size)
    return float(value.real)


def angular_dipole_closed_form(bra: Tuple[int, int] = (0, 0), ket: Tuple[int, int] = (1, 0)) -> float:
    """Same matrix element from the exact Gaunt coefficient."""
    from sympy.physics.wigner import gaunt

    (lb, mb), (lk, mk) = bra, ket
    coefficient = gaunt(lb, 1, lk, -mb, 0, mk)
    return float((-1) ** mb * math.sqrt(4.0 * math.pi / 3.0) * coefficient)


def volume_matrix_element(
    bra: OrbitalLabel,
    ket: OrbitalLabel,
    operator: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    a0: float = 1.0,
    radial_nodes: int = 200,
    angular_nodes: int = 24,
) -> complex:
    """⟨bra|O(x, y, z)|ket⟩ on a product grid.

    Gauss–Legendre in r over [0, 40·n·a0] and in cos θ; a uniform rule in φ,
    exact for the e^{imφ} factors involved.
    """
    upper = RADIAL_EXTENT * max(bra.n, ket.n) * a0
    xr, wr = np.polynomial.legendre.leggauss(radial_nodes)
    r = 0.5 * upper * (xr + 1.0)
    wr = 0.5 * upper * wr
    xc, wc = np.polynomial.legendre.leggauss(angular_nodes)
    phi = np.linspace(0.0, 2.0 * math.pi, 2 * angular_nodes, endpoint=False)
    wp = 2.0 * math.pi / phi.size

    R, C, P = np.meshgrid(r, xc, phi, indexing="ij")
    theta = np.arccos(C)
    sin_t = np.sqrt(1.0 - C**2)
    x, y, z = R * sin_t * np.cos(P), R * sin_t * np.sin(P), R * C
    density = np.conj(wavefunction(bra, R, theta, P, a0)) * operator(x, y, z) * wavefunction(ket, R, theta, P, a0)
    weights = wr[:, None, None] * r[:, None, None] ** 2 * wc[None, :, None] * wp
    return complex(np.sum(weights * density))


def kinetic_energy_expectation(orbital: OrbitalLabel, a0: Any = 1.0, mu: Any = 1.0, units: UnitSystem = PLANCK) -> Any:
    """⟨p²/2μ⟩ = ħ²/(2μ) ∫ (R'² r² + l(l+1) R²) dr."""
    n, l = orbital.n, orbital.l
    a = float(getattr(a0, "value", a0))
    integral = quadrature.integrate_real(
        lambda r: float(radial_derivative(n, l, r, a)) ** 2 * r**2 + l * (l + 1) * float(radial_function(n, l, r, a)) ** 2,
        0.0,
        RADIAL_EXTENT * n * a,
    )
    return units.hbar**2 / (2 * mu) * integral


# ---------------------------------------------------------------------- #
# Spectrum and couplings
# ---------------------------------------------------------------------- #
def energy_levels(params: QuasiatomParams) -> Tuple[Any, Any]:
    """Ground and first excited total energies (E0, E1)."""
    return params.E0, params.E1


def level_energy(params: QuasiatomParams, n: int) -> Any:
    """Bohr level Mc² − E_R/n²."""
    if n < 1:
        raise ValidationError(f"n must be at least 1, got {n}")
    return params.M * params.units.c**2 - params.E_R / n**2


def dipole_matrix_element(E_field: Any, params: QuasiatomParams) -> Any:
    """⟨1s|−q E z|2p₀⟩ = −(128√2/243) q a0 E."""
    return -DIPOLE_COEFF * params.q * params.a0 * E_field


def dipole_matrix_element_numeric(E_field: float, params: QuasiatomParams) -> float:
    a0 = float(getattr(params.a0, "value", params.a0))
    q = float(getattr(params.q, "value", params.q))
    z = volume_matrix_element(OrbitalLabel(1, 0, 0), OrbitalLabel(2, 1, 0), lambda x, y, zz: zz, a0)
    return -q * E_field * z.real


# ---------------------------------------------------------------------- #
# Requirements chain
# ---------------------------------------------------------------------- #
def phase_energy_coefficient() -> float:
    """E₁ must exceed √(2π)/3 E_P when the arm separation equals the distance."""
    return math.sqrt(2.0 * math.pi) / 3.0


def rydberg_fraction_bound(coefficient: float | None = None) -> float:
    """Smallest E_R/(Mc²) allowing E₀ < 0.143 E_P and E₁ > 0.836 E_P together (≈ 0.866)."""
    ratio = phase_energy_coefficient() / (coefficient or time_resolution_coefficient())
    return (ratio - 1.0) / (ratio - 0.25)


def minimum_total_mass(fraction: float | None = None) -> float:
    """M/m_P at which E₁ reaches √(2π)/3 E_P with E_R at its bound (≈ 1.066)."""
    r = rydberg_fraction_bound() if fraction is None else fraction
    return phase_energy_coefficient() / (1.0 - r / 4.0)


def charge_coefficient(fraction: float | None = None, inverse_alpha: float | None = None) -> float:
    """q/e · (μ/M)^{1/4} required by E_R ≥ r Mc² (≈ 13.4)."""
    r = rydberg_fraction_bound() if fraction is None else fraction
    alpha_inv = inverse_alpha or 1.0 / CODATA_2018.fine_structure
    return math.sqrt(alpha_inv * math.sqrt(2.0 * r))


def bohr_slope(fraction: float | None = None, mass: float | None = None) -> float:
    """a0 / (l_P √(M/μ)) at the saturating point (≈ 0.71)."""
    r = rydberg_fraction_bound() if fraction is None else fraction
    m_min = minimum_total_mass(r) if mass is None else mass
    return 1.0 / (m_min * math.sqrt(2.0 * r))


@dataclass(frozen=True)
class BohrRadiusReport:
    mass_ratio: float
    a0: float
    printed_bound: float
    printed_slope_value: float


def bohr_radius_bound(mass_ratio: float, units: UnitSystem = PLANCK) -> BohrRadiusReport:
    """Bohr radius at the saturating point of the chain, in units of l_P.

    Reports the first-principles value ħ/(c√(2rMμ)) next to the printed
    approximations ħ²/(179.6 k e² √(Mμ)) and 0.71 l_P √(M/μ).
    """
    if mass_ratio < 1.0:
        raise ValidationError(f"M/μ is at least 1, got {mass_ratio!r}")
    r = rydberg_fraction_bound()
    m_total = minimum_total_mass(r) * units.m_P
    mu = m_total / mass_ratio
    a0 = units.hbar / (units.c * sqrt(2 * r * m_total * mu))
    squared_charge = 179.6 * math.sqrt(mass_ratio)
    printed_bound = units.hbar**2 / (squared_charge * units.k_e * units.e**2 * mu)
    as_planck = lambda x: float(getattr(x / units.l_P, "value", x / units.l_P))  # noqa: E731
    return BohrRadiusReport(
        mass_ratio=mass_ratio,
        a0=as_planck(a0),
        printed_bound=as_planck(printed_bound),
        printed_slope_value=0.71 * math.sqrt(mass_ratio),
    )
