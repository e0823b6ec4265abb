"""
graviton.py

Coupling of the quasiatom to a quantized gravitational wave in the dipole
approximation: strain per graviton, polarization tensors, rank-two
spherical unit tensors, quadrupole matrix elements, selection rules and
the first- and second-order transition amplitudes and rates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from sympy.physics.wigner import gaunt

from src import quadrature
from src.errors import PoleError, ValidationError
from src.quasiatom import OrbitalLabel, QuasiatomParams, radial_matrix_element, volume_matrix_element
from src.radiative import transverse_basis
from src.units import PLANCK, UnitSystem, sqrt

logger = logging.getLogger(__name__)

POLE_RTOL = 1e-9
RESONANCE_RTOL = 1e-9
TENSOR_TOL = 1e-10


def _value(x: Any) -> float:
    return float(getattr(x, "value", x))


# ---------------------------------------------------------------------- #
# Strain and polarization
# ---------------------------------------------------------------------- #
def strain_amplitude(omega: Any, V: Any, units: UnitSystem = PLANCK) -> Any:
    """Single-graviton strain h = √(16πGħ / (V ω c²))."""
    if not _value(omega) > 0 or not _value(V) > 0:
        raise ValidationError("omega and V must be positive")
    return sqrt(16 * math.pi * units.G * units.hbar / (V * omega * units.c**2))


@dataclass(frozen=True)
class GWPolarization:
    e: np.ndarray
    k_hat: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ("+", "x"):
            raise ValidationError(f"Polarization kind must be '+' or 'x', got {self.kind!r}")
        residuals = self.invariant_residuals()
        if max(residuals.values()) > TENSOR_TOL:
            raise ValidationError(f"Polarization tensor violates its invariants: {residuals}")

    @classmethod
    def along(
        cls,
        k_hat: Sequence[float],
        kind: str = "+",
        angle: float = 0.0,
        basis: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    ) -> "GWPolarization":
        """e⁺ = e1e1 − e2e2 or e^× = e1e2 + e2e1 for an orthonormal pair ⟂ k."""
        k = np.asarray(k_hat, dtype=float)
        k = k / np.linalg.norm(k)
        if basis is None:
            e1, e2 = transverse_basis(k, angle)
        else:
            e1, e2 = (np.asarray(v, dtype=float) for v in basis)
        if kind == "+":
            tensor = np.outer(e1, e1) - np.outer(e2, e2)
        else:
            tensor = np.outer(e1, e2) + np.outer(e2, e1)
        return cls(e=tensor, k_hat=k, kind=kind)

    @classmethod
    def along_z(cls, kind: str = "+") -> "GWPolarization":
        return cls.along((0.0, 0.0, 1.0), kind, basis=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)))

    def invariant_residuals(self) -> dict:
        return {
            "transverse": float(np.max(np.abs(self.e @ self.k_hat))),
            "symmetric": float(np.max(np.abs(self.e - self.e.T))),
            "traceless": abs(float(np.trace(self.e))),
            "norm": abs(float(np.sum(self.e * self.e)) - 2.0),
        }


# ---------------------------------------------------------------------- #
# Spherical unit tensors
# ---------------------------------------------------------------------- #
_N2 = math.sqrt(15.0 / (32.0 * math.pi))
_N0 = math.sqrt(5.0 / (16.0 * math.pi))


@dataclass(frozen=True)
class SphericalUnitTensor:
    """𝒴^m with Y₂^m(r̂) = 𝒴^m_ij r̂_i r̂_j."""

    m: int
    components: np.ndarray

    def __call__(self, r_hat: Sequence[float]) -> complex:
        r = np.asarray(r_hat, dtype=float)
        return complex(r @ self.components @ r)


def spherical_unit_tensor(m: int) -> SphericalUnitTensor:
    if m not in (-2, -1, 0, 1, 2):
        raise ValidationError(f"m must lie in [-2, 2], got {m}")
    s = 1j if m > 0 else -1j
    if abs(m) == 2:
        matrix = _N2 * np.array([[1, s, 0], [s, -1, 0], [0, 0, 0]], dtype=complex)
    elif abs(m) == 1:
        matrix = (-_N2 if m > 0 else _N2) * np.array([[0, 0, 1], [0, 0, s], [1, s, 0]], dtype=complex)
    else:
        matrix = _N0 * np.diag([-1.0, -1.0, 2.0]).astype(complex)
    return SphericalUnitTensor(m=m, components=matrix)


UNIT_TENSORS = {m: spherical_unit_tensor(m) for m in range(-2, 3)}


def traceless_projection(r_hat: Sequence[float]) -> np.ndarray:
    """(8π/15) Σ_m 𝒴^{m*} Y₂^m(r̂), equal to r̂_i r̂_j − δ_ij/3."""
    total = sum(np.conj(t.components) * t(r_hat) for t in UNIT_TENSORS.values())
    return (8.0 * math.pi / 15.0) * total


def tensor_identity_residual(r_hat: Sequence[float]) -> float:
    r = np.asarray(r_hat, dtype=float)
    r = r / np.linalg.norm(r)
    expected = np.outer(r, r) - np.eye(3) / 3.0
    return float(np.max(np.abs(traceless_projection(r) - expected)))


# ---------------------------------------------------------------------- #
# Matrix elements and selection rules
# ---------------------------------------------------------------------- #
def quadrupole_matrix_element(
    bra: OrbitalLabel,
    ket: OrbitalLabel,
    pol: GWPolarization,
    a0: float = 1.0,
    method: str = "quadrature",
) -> complex:
    """⟨bra| e_ij x^i x^j |ket⟩.

    `quadrature` integrates on the 3-D product grid; `analytic` expands the
    traceless e_ij on the spherical unit tensors and uses exact Gaunt
    coefficients times a 1-D radial integral.
    """
    if method == "quadrature":
        e = pol.e

        def operator(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
            coords = (x, y, z)
            return sum(e[i, j] * coords[i] * coords[j] for i in range(3) for j in range(3))

        return volume_matrix_element(bra, ket, operator, a0)
    if method != "analytic":
        raise ValidationError(f"Unknown method {method!r}")

    radial = None
    total = 0j
    for m, tensor in UNIT_TENSORS.items():
        projection = complex(np.sum(pol.e * np.conj(tensor.components)))
        if abs(projection) < 1e-15:
            continue
        angular = float(gaunt(bra.l, 2, ket.l, -bra.m, m, ket.m))
        if angular == 0.0:
            continue
        if radial is None:
            radial = radial_matrix_element((bra.n, bra.l), (ket.n, ket.l), power=2, a0=a0)
        total += (8.0 * math.pi / 15.0) * projection * (-1) ** bra.m * angular * radial
    return total


def phi_selection_integral(n: int, which: str = "cos") -> complex:
    """∫₀^{2π} e^{inφ} cos 2φ dφ (π if n = ±2) or the sin variant (iπ sign n)."""
    if which == "cos":
        return complex(math.pi) if abs(n) == 2 else 0j
    if which == "sin":
        return 1j * math.pi * math.copysign(1.0, n) if abs(n) == 2 else 0j
    raise ValidationError(f"which must be 'cos' or 'sin', got {which!r}")


def phi_selection_quadrature(n: int, which: str = "cos") -> complex:
    if which not in ("cos", "sin"):
        raise ValidationError(f"which must be 'cos' or 'sin', got {which!r}")
    drive = math.cos if which == "cos" else math.sin
    return quadrature.integrate_complex(lambda phi: np.exp(1j * n * phi) * drive(2.0 * phi), 0.0, 2.0 * math.pi)


@dataclass(frozen=True)
class SelectionVerdict:
    l_initial: int
    l_final: int
    allowed: bool
    note: str = ""


def selection_rule(l_initial: int, l_final: int) -> SelectionVerdict:
    """Single-graviton transitions change l by exactly two."""
    if l_initial < 0 or l_final < 0:
        raise ValidationError("l must be non-negative")
    delta = abs(l_final - l_initial)
    note = ""
    if delta == 1:
        note = "electromagnetically allowed but gravitationally forbidden"
    return SelectionVerdict(l_initial, l_final, delta == 2, note)


# ---------------------------------------------------------------------- #
# Transition amplitudes
# ---------------------------------------------------------------------- #
def _phase_integral(frequency: float, t: float) -> complex:
    """∫₀^t e^{iΩs} ds, using the limit t when Ω vanishes."""
    if abs(frequency) * t < 1e-12:
        return complex(t)
    return (np.exp(1j * frequency * t) - 1.0) / (1j * frequency)


def coupling(h: Any, mu: Any, M: Any, omega: Any, Q: Any) -> Any:
    """Interaction weight W = (h/2)(μ/M) ω² Q of a sinusoidal strain."""
    return h / 2 * (mu / M) * omega**2 * Q


def first_order_amplitude_raw(omega_ab: float, omega: float, t: float, W: complex, hbar: float = 1.0) -> complex:
    """a⁽¹⁾ = −(i/ħ) W ∫₀^t sin(ωs) e^{iω_αβ s} ds, resonant and antiresonant terms."""
    if t < 0:
        raise ValidationError("t must be non-negative")
    integral = (_phase_integral(omega_ab + omega, t) - _phase_integral(omega_ab - omega, t)) / 2j
    return -1j / hbar * W * integral


def first_order_amplitude_numeric(omega_ab: float, omega: float, t: float, W: complex, hbar: float = 1.0) -> complex:
    if t == 0:
        return 0j
    integral = quadrature.integrate_complex(
        lambda s: math.sin(omega * s) * np.exp(1j * omega_ab * s), 0.0, t, limit=2000
    )
    return -1j / hbar * W * integral


def transition_frequency(params: QuasiatomParams, upper: OrbitalLabel, lower: OrbitalLabel) -> Any:
    """ω_αβ = (E_α − E_β)/ħ from the Bohr levels."""
    return params.E_R * (1 / lower.n**2 - 1 / upper.n**2) / params.units.hbar


def first_order_amplitude(
    alpha: OrbitalLabel,
    beta: OrbitalLabel,
    omega: float,
    t: float,
    V: float,
    params: QuasiatomParams,
    pol: Optional[GWPolarization] = None,
) -> complex:
    """a⁽¹⁾_αβ(t) for a single-graviton strain of frequency ω in volume V."""
    units = params.units
    pol = pol or GWPolarization.along_z("+")
    Q = quadrupole_matrix_element(alpha, beta, pol, _value(params.a0))
    W = coupling(strain_amplitude(omega, V, units), params.mu, params.M, omega, Q)
    return first_order_amplitude_raw(_value(transition_frequency(params, alpha, beta)), omega, t, W, units.hbar)


def second_order_amplitude_raw(
    omega_ab: float,
    omega_gb: float,
    w1: complex,
    w2: complex,
    omega1: float,
    omega2: float,
    t: float,
    hbar: float = 1.0,
) -> complex:
    """Closed-form second-order amplitude through one intermediate level.

    Drive 1 (ω₁) couples β→γ and drive 2 (ω₂) couples γ→α; the four sign
    combinations ±ω₁, ±ω₂ each contribute a resonant and a boundary term.
    """
    omega_ag = omega_ab - omega_gb
    total = 0j
    for s1 in (1, -1):
        detuning = omega_gb + s1 * omega1
        if abs(detuning) <= POLE_RTOL * abs(omega1):
            raise PoleError(f"Intermediate detuning ω_γβ − ω₁ vanishes (ω_γβ={omega_gb}, ω₁={omega1})")
        for s2 in (1, -1):
            total += s1 * s2 * (
                _phase_integral(omega_ab + s1 * omega1 + s2 * omega2, t) - _phase_integral(omega_ag + s2 * omega2, t)
            ) / detuning
    return -1j / (4.0 * hbar**2) * w1 * w2 * total


def second_order_amplitude_numeric(
    omega_ab: float,
    omega_gb: float,
    w1: complex,
    w2: complex,
    omega1: float,
    omega2: float,
    t: float,
    points: int = 20001,
    hbar: float = 1.0,
) -> complex:
    """Nested time quadrature of the second-order Dyson term."""
    times = np.linspace(0.0, t, points)
    inner = integrate.cumulative_simpson(np.sin(omega1 * times) * np.exp(1j * omega_gb * times), x=times, initial=0.0)
    outer = np.sin(omega2 * times) * np.exp(1j * (omega_ab - omega_gb) * times) * inner
    return -(w1 * w2) / hbar**2 * complex(integrate.simpson(outer, x=times))


def density_of_states_rate(
    w1: complex, w2: complex, omega_gb: float, omega1: float, density: float, hbar: float = 1.0
) -> float:
    """Γ = π |W₁W₂|² ρ / (8 ħ⁴ (ω_γβ − ω₁)²) for a continuum of final levels."""
    detuning = omega_gb - omega1
    if abs(detuning) <= POLE_RTOL * abs(omega1):
        raise PoleError(f"Drive ω₁={omega1} sits on the intermediate level ω_γβ={omega_gb}")
    return math.pi * abs(w1 * w2) ** 2 * density / (8.0 * hbar**4 * detuning**2)


def single_state_rate(
    Q_ag: complex, Q_gb: complex, omega_bg: float, omega_ga: float, omega_gb: float,
    V: float, mu: float, M: float, units: UnitSystem = PLANCK,
) -> float:
    """(π/2)(μ²πG/(ħVM²c²))² |ω_βγ³ ω_γα³| |Q_αγ Q_γβ / ω_γβ|², as printed."""
    if abs(omega_gb) == 0.0:
        raise PoleError("ω_γβ vanishes")
    prefactor = (mu**2 * math.pi * units.G / (units.hbar * V * M**2 * units.c**2)) ** 2
    return math.pi / 2.0 * prefactor * abs(omega_bg**3 * omega_ga**3) * abs(Q_ag * Q_gb / omega_gb) ** 2


def intermediate_states(n_max: int = 3) -> List[OrbitalLabel]:
    """All orbitals up to n_max, the truncated intermediate-state basis."""
    return [OrbitalLabel(n, l, m) for n in range(1, n_max + 1) for l in range(n) for m in range(-l, l + 1)]


def second_order_rate(
    alpha: OrbitalLabel,
    gammas: Iterable[OrbitalLabel],
    beta: OrbitalLabel,
    omega1: float,
    omega2: float,
    V: float,
    params: QuasiatomParams,
    pol: Optional[GWPolarization] = None,
    density: Optional[float] = None,
) -> float:
    """Constant two-graviton rate β → γ → α.

    Without `density` the single-final-state form is returned; with it, the
    continuum form Γ ∝ ρ(ω_αβ). Channels through several γ add coherently.

    Raises:
        PoleError: If ω₁ coincides with some ω_γβ.
    """
    units = params.units
    pol = pol or GWPolarization.along_z("+")
    a0 = _value(params.a0)
    omega_ab = _value(transition_frequency(params, alpha, beta))
    if abs(omega1 + omega2 - omega_ab) > RESONANCE_RTOL * abs(omega_ab):
        logger.warning("ω₁+ω₂=%g misses ω_αβ=%g; constant rate is zero off resonance", omega1 + omega2, omega_ab)
        return 0.0

    gammas = list(gammas)
    logger.info("Intermediate-state sum truncated to %d states", len(gammas))
    h1 = strain_amplitude(omega1, V, units)
    h2 = strain_amplitude(omega2, V, units)
    coherent = 0j
    verbatim = 0j
    for gamma in gammas:
        Q_gb = quadrupole_matrix_element(gamma, beta, pol, a0)
        Q_ag = quadrupole_matrix_element(alpha, gamma, pol, a0)
        if abs(Q_gb * Q_ag) < 1e-14:
            continue
        omega_gb = _value(transition_frequency(params, gamma, beta))
        if abs(omega_gb - omega1) <= POLE_RTOL * abs(omega1):
            raise PoleError(f"Drive ω₁={omega1} sits on the intermediate level {gamma.name}")
        omega_ag = omega_ab - omega_gb
        w1 = coupling(h1, params.mu, params.M, omega1, Q_gb)
        w2 = coupling(h2, params.mu, params.M, omega2, Q_ag)
        coherent += w1 * w2 / (omega_gb - omega1)
        verbatim += Q_ag * Q_gb * math.sqrt(abs(omega_gb**3 * omega_ag**3)) / omega_gb

    if density is not None:
        return math.pi * abs(coherent) ** 2 * density / (8.0 * units.hbar**4)
    prefactor = (_value(params.mu) ** 2 * math.pi * units.G / (units.hbar * V * _value(params.M) ** 2 * units.c**2)) ** 2
    return math.pi / 2.0 * prefactor * abs(verbatim) ** 2


@dataclass(frozen=True)
class GravitonTransition:
    """One β → (γ) → α transition driven by gravitons of frequency ω₁ (and ω₂)."""

    initial: OrbitalLabel
    final: OrbitalLabel
    omega1: float
    omega2: Optional[float]
    t: float
    amplitude: complex
    rate: Optional[float]
    intermediate: Optional[OrbitalLabel] = None

    @property
    def probability(self) -> float:
        return abs(self.amplitude) ** 2

    @property
    def order(self) -> int:
        return 1 if self.intermediate is None else 2


def resolve_transition(
    beta: OrbitalLabel,
    alpha: OrbitalLabel,
    omega1: float,
    t: float,
    V: float,
    params: QuasiatomParams,
    intermediate: Optional[OrbitalLabel] = None,
    omega2: Optional[float] = None,
    pol: Optional[GWPolarization] = None,
) -> GravitonTransition:
    """Amplitude at time t and constant rate of β → α.

    Without an intermediate level the first-order amplitude is returned and
    the rate is left unset. Through γ the second-order amplitude is used and
    the rate is zero unless ω₁ + ω₂ matches ω_αβ.
    """
    pol = pol or GWPolarization.along_z("+")
    if intermediate is None:
        amplitude = first_order_amplitude(alpha, beta, omega1, t, V, params, pol)
        return GravitonTransition(beta, alpha, omega1, None, t, amplitude, None)
    if omega2 is None:
        raise ValidationError("A second-order transition needs omega2")

    units = params.units
    a0 = _value(params.a0)
    omega_ab = _value(transition_frequency(params, alpha, beta))
    omega_gb = _value(transition_frequency(params, intermediate, beta))
    w1 = coupling(strain_amplitude(omega1, V, units), params.mu, params.M, omega1,
                  quadrupole_matrix_element(intermediate, beta, pol, a0))
    w2 = coupling(strain_amplitude(omega2, V, units), params.mu, params.M, omega2,
                  quadrupole_matrix_element(alpha, intermediate, pol, a0))
    amplitude = second_order_amplitude_raw(omega_ab, omega_gb, w1, w2, omega1, omega2, t, units.hbar)
    rate = second_order_rate(alpha, [intermediate], beta, omega1, omega2, V, params, pol)
    return GravitonTransition(beta, alpha, omega1, omega2, t, amplitude, rate, intermediate)


def band_rate_oracle(
    omega1: float = 1.0,
    omega2: float = 1.0,
    omega_gb: float = 1.3,
    band_centre: float = 2.0,
    half_width: float = 0.2,
    spacing: float = 5e-4,
    t: float = 1000.0,
    points: int = 20001,
    w1: complex = 1.0,
    w2: complex = 1.0,
    chunk: int = 64,
) -> Tuple[float, float]:
    """Σ_levels |a⁽²⁾(t)|²/t over a band of final levels against the continuum rate.

    The inner time integral does not depend on the final level, so it is
    computed once; the outer integral runs over the band in chunks.

    Returns:
        (numeric rate, closed-form rate), in units with ħ = 1.
    """
    times = np.linspace(0.0, t, points)
    inner = integrate.cumulative_simpson(np.sin(omega1 * times) * np.exp(1j * omega_gb * times), x=times, initial=0.0)
    drive = np.sin(omega2 * times) * inner
    levels = np.arange(band_centre - half_width, band_centre + half_width + spacing / 2.0, spacing)
    total = 0.0
    for start in range(0, levels.size, chunk):
        omega_ag = levels[start:start + chunk, None] - omega_gb
        outer = integrate.simpson(drive[None, :] * np.exp(1j * omega_ag * times[None, :]), x=times, axis=1)
        total += float(np.sum(np.abs(w1 * w2 * outer) ** 2))
    numeric = total / t
    return numeric, density_of_states_rate(w1, w2, omega_gb, omega1, 1.0 / spacing)
