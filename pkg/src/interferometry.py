"""
interferometry.py

Alice's quadrupole and Bob's test-particle interferometer: the Newtonian
potential of a quadrupole, which-way displacement, the single-graviton
emission bound, gravitational phases, the displaced Gaussian wavepackets
and the visibility of Bob's recombined state.

All quantities are plain floats in the unit system passed in (Planck by
default), or PhysicalQuantity values when a dimensioned system is used.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from src import quadrature
from src.errors import NumericalError, ValidationError
from src.trajectory import OPTIMAL, effective_time, speed_ratio
from src.units import PLANCK, UnitSystem, sqrt

logger = logging.getLogger(__name__)

ENDPOINT_TOL = 1e-8
ODE_RTOL = 1e-10


def _value(x: Any) -> float:
    return float(getattr(x, "value", x))


def _require_positive(**values: Any) -> None:
    for name, x in values.items():
        if not _value(x) > 0:
            raise ValidationError(f"{name} must be positive, got {_value(x)!r}")


# ---------------------------------------------------------------------- #
# Domain types
# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class AliceQuadrupole:
    Q0: Any
    delta_q: Any
    T: Any

    def __post_init__(self) -> None:
        _require_positive(T=self.T)
        if _value(self.delta_q) > _value(self.Q0):
            logger.warning("Quadrupole split ΔQ=%g exceeds the mean Q0=%g", _value(self.delta_q), _value(self.Q0))

    @property
    def q_plus(self) -> Any:
        return self.Q0 + self.delta_q

    @property
    def q_minus(self) -> Any:
        return self.Q0 - self.delta_q


@dataclass(frozen=True)
class InterferometerSetup:
    m: Any
    d: Any
    D: Any
    tau_a: Any
    tau_f: Any
    sigma: Any
    delta_t: Any

    def __post_init__(self) -> None:
        _require_positive(m=self.m, d=self.d, D=self.D, tau_a=self.tau_a, tau_f=self.tau_f, sigma=self.sigma)
        if _value(self.delta_t) < 0:
            raise ValidationError(f"delta_t must be non-negative, got {_value(self.delta_t)!r}")

    @property
    def tau_t(self) -> Any:
        """Total flight time: opening, free flight, closing."""
        return self.tau_f + 2 * self.tau_a

    @property
    def tau_e(self) -> Any:
        return effective_time(self.tau_f, self.tau_a)


@dataclass(frozen=True)
class PhaseSet:
    phi_pp: float
    phi_pm: float
    phi_mp: float
    phi_mm: float
    Gamma: float
    gamma: float

    def recovered(self) -> Tuple[float, float]:
        """(Γ, γ) rebuilt from the four branch phases."""
        upper = self.phi_pp - self.phi_pm
        lower = self.phi_mp - self.phi_mm
        return (upper + lower) / 2.0, (upper - lower) / 2.0

    def as_dict(self) -> dict:
        return {
            "Gamma": self.Gamma,
            "gamma": self.gamma,
            "phi_pp": self.phi_pp,
            "phi_pm": self.phi_pm,
            "phi_mp": self.phi_mp,
            "phi_mm": self.phi_mm,
        }


Analytic = Tuple[Callable[[Any], np.ndarray], Callable[[Any], np.ndarray]]


@dataclass(frozen=True)
class ForceProfile:
    """Force on Bob's particle during one acceleration phase.

    The profile must leave the particle at rest at displacement d after
    tau_a: ∫F dt = 0 and ∫∫F dt dt = m d. When `analytic` is given it holds
    closed forms (u, u̇) of the resulting path.
    """

    force: Callable[[float], float]
    tau_a: float
    d: float
    breakpoints: Tuple[float, ...] = ()
    analytic: Optional[Analytic] = field(default=None, compare=False)

    @classmethod
    def canonical(cls, m: float, d: float, tau_a: float) -> "ForceProfile":
        """Radiation-optimal shape run backwards: u(t) = d ξ_opt(1 − t/τ_a)."""
        _require_positive(m=m, d=d, tau_a=tau_a)

        def position(t: Any) -> np.ndarray:
            return d * OPTIMAL.xi(1.0 - np.asarray(t, dtype=float) / tau_a)

        def velocity(t: Any) -> np.ndarray:
            return -d / tau_a * OPTIMAL.xi_dot(1.0 - np.asarray(t, dtype=float) / tau_a)

        def force(t: float) -> float:
            tau = 1.0 - t / tau_a
            if tau >= 1.0:
                return math.inf
            return float(m * d / tau_a**2 * OPTIMAL.shape.xi_ddot(tau))

        return cls(force=force, tau_a=tau_a, d=d, analytic=(position, velocity))

    @classmethod
    def impulse_pair(cls, m: float, d: float, tau_a: float) -> "ForceProfile":
        """+F0 for the first half, −F0 for the second, F0 = 4md/τ_a²."""
        _require_positive(m=m, d=d, tau_a=tau_a)
        f0 = 4.0 * m * d / tau_a**2
        half = tau_a / 2.0
        return cls(force=lambda t: f0 if t < half else -f0, tau_a=tau_a, d=d, breakpoints=(half,))

    @classmethod
    def zero(cls, tau_a: float) -> "ForceProfile":
        _require_positive(tau_a=tau_a)
        return cls(force=lambda t: 0.0, tau_a=tau_a, d=0.0)

    def check_integrals(self, m: float) -> Tuple[float, float]:
        """Return (∫F dt, ∫₀^τ_a (τ_a − t)F dt / m) and raise if either misses its target."""
        if self.analytic is not None:
            position, velocity = self.analytic
            impulse = m * float(velocity(self.tau_a) - velocity(0.0))
            displacement = float(position(self.tau_a) - position(0.0))
        else:
            points = list(self.breakpoints) or None
            impulse = quadrature.integrate_real(self.force, 0.0, self.tau_a, points=points)
            displacement = quadrature.integrate_real(
                lambda t: (self.tau_a - t) * self.force(t), 0.0, self.tau_a, points=points
            ) / m
        scale = abs(m * self.d) / self.tau_a
        if abs(impulse) > ENDPOINT_TOL * scale or abs(displacement - self.d) > ENDPOINT_TOL * abs(self.d):
            raise ValidationError(
                f"Force profile does not end at rest at d={self.d}: impulse {impulse:.3e}, displacement {displacement:.12g}"
            )
        return impulse, displacement


# ---------------------------------------------------------------------- #
# Classical paths
# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class ClassicalPath:
    """u(t) and u̇(t) on [0, duration]; beyond the end the particle coasts."""

    position_fn: Callable[[np.ndarray], np.ndarray]
    velocity_fn: Callable[[np.ndarray], np.ndarray]
    duration: float
    breakpoints: Tuple[float, ...] = ()

    def position(self, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        inside = np.clip(t, 0.0, self.duration)
        end_v = float(np.squeeze(self.velocity_fn(np.asarray(self.duration))))
        return self.position_fn(inside) + end_v * np.clip(t - self.duration, 0.0, None)

    def velocity(self, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.velocity_fn(np.clip(t, 0.0, self.duration))

    def kinetic_integral(self, t: float) -> float:
        """∫₀^t u̇(s)² ds."""
        upper = min(t, self.duration)
        points = [p for p in self.breakpoints if 0.0 < p < upper] or None
        total = 0.0
        if upper > 0.0:
            total = quadrature.integrate_real(lambda s: float(np.squeeze(self.velocity(s))) ** 2, 0.0, upper, points=points)
        if t > self.duration:
            total += float(np.squeeze(self.velocity(self.duration))) ** 2 * (t - self.duration)
        return total

    def sample(self, n_samples: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        times = np.linspace(0.0, self.duration, n_samples)
        return times, self.position(times), self.velocity(times)


def _piecewise(pieces: Sequence[Callable], edges: np.ndarray, t: np.ndarray, component: int) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    index = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(pieces) - 1)
    out = np.empty_like(t)
    for i, piece in enumerate(pieces):
        mask = index == i
        if np.any(mask):
            out[mask] = piece(t[mask])[component]
    return out


def classical_path(profile: ForceProfile, m: float) -> ClassicalPath:
    """Solve m ü = F(t) from rest at the origin over one acceleration phase.

    The canonical profile uses its closed form; any other profile is
    integrated with adaptive Runge–Kutta, restarting at each breakpoint.

    Raises:
        NumericalError: If the integrator fails or the end state misses
            u(τ_a) = d, u̇(τ_a) = 0 by more than 1e−8 d.
    """
    _require_positive(m=m)
    if profile.analytic is not None:
        position, velocity = profile.analytic
        path = ClassicalPath(position, velocity, profile.tau_a, profile.breakpoints)
    else:
        edges = np.array([0.0, *sorted(b for b in profile.breakpoints if 0.0 < b < profile.tau_a), profile.tau_a])
        atol = 1e-12 * max(abs(profile.d), abs(profile.d) / profile.tau_a, np.finfo(float).tiny)
        state = np.zeros(2)
        pieces: List[Callable] = []
        for left, right in zip(edges[:-1], edges[1:]):
            solution = integrate.solve_ivp(
                lambda t, y: [y[1], profile.force(t) / m],
                (left, right),
                state,
                method="RK45",
                rtol=ODE_RTOL,
                atol=atol,
                dense_output=True,
            )
            if not solution.success:
                raise NumericalError(f"ODE integration failed on [{left}, {right}]: {solution.message}")
            pieces.append(solution.sol)
            state = solution.y[:, -1]
        path = ClassicalPath(
            lambda t: _piecewise(pieces, edges, t, 0),
            lambda t: _piecewise(pieces, edges, t, 1),
            profile.tau_a,
            tuple(edges[1:-1]),
        )

    u_end = float(np.squeeze(path.position(profile.tau_a)))
    v_end = float(np.squeeze(path.velocity(profile.tau_a)))
    if abs(u_end - profile.d) > ENDPOINT_TOL * abs(profile.d) or abs(v_end) > ENDPOINT_TOL * abs(profile.d) / profile.tau_a:
        raise NumericalError(
            f"Classical path misses its end state: u={u_end!r}, u̇={v_end!r}, target d={profile.d!r}",
            estimate=u_end,
            error=abs(u_end - profile.d),
        )
    return path


def interferometer_path(opening: ClassicalPath, tau_f: float) -> ClassicalPath:
    """Opening, free flight at the full separation, then the mirrored closing."""
    tau_a = opening.duration
    d = float(np.squeeze(opening.position(tau_a)))
    hold_end = tau_a + tau_f

    def position(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(
            t <= tau_a,
            opening.position(np.minimum(t, tau_a)),
            np.where(t <= hold_end, d, opening.position(np.clip(2 * tau_a + tau_f - t, 0.0, tau_a))),
        )

    def velocity(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(
            t <= tau_a,
            opening.velocity(np.minimum(t, tau_a)),
            np.where(t <= hold_end, 0.0, -opening.velocity(np.clip(2 * tau_a + tau_f - t, 0.0, tau_a))),
        )

    mirrored = tuple(hold_end + tau_a - b for b in reversed(opening.breakpoints))
    breakpoints = (*opening.breakpoints, tau_a, hold_end, *mirrored)
    return ClassicalPath(position, velocity, 2 * tau_a + tau_f, breakpoints)


# ---------------------------------------------------------------------- #
# Potentials, displacement and phases
# ---------------------------------------------------------------------- #
def quadrupole_potential(Q: Any, D: Any, dx: Any, units: UnitSystem = PLANCK) -> Tuple[Any, Any]:
    """Exact and linearized potential at D + dx relative to the value at D.

    Returns:
        (−GQ/(D+dx)³ + GQ/D³, 3G dx Q/D⁴)
    """
    if not _value(D + dx) > 0:
        raise ValidationError(f"D + dx must be positive, got {_value(D + dx)!r}")
    exact = -units.G * Q / (D + dx) ** 3 + units.G * Q / D**3
    linear = 3 * units.G * dx * Q / D**4
    return exact, linear


def test_particle_displacement(delta_q: Any, D: Any, tau_f: Any, units: UnitSystem = PLANCK) -> Any:
    """δ = 3G τ_f² ΔQ / D⁴."""
    _require_positive(D=D, tau_f=tau_f)
    return 3 * units.G * tau_f**2 * delta_q / D**4


test_particle_displacement.__test__ = False  # not a pytest test


def graviton_emission_bound(T: Any, units: UnitSystem = PLANCK) -> Any:
    """Largest ΔQ whose optimal closing in time T radiates less than one quantum 2πħ/T."""
    _require_positive(T=T)
    return math.sqrt(2 * math.pi) / 8 * units.m_P * units.c**2 * T**2


def gravitational_phases(
    setup: InterferometerSetup, alice: AliceQuadrupole, units: UnitSystem = PLANCK
) -> PhaseSet:
    """Branch phases φ_{Alice,Bob} accumulated over the effective time τ_e."""
    tau_e = setup.tau_e
    scale = 6 * units.G * setup.m * tau_e * setup.d / (units.hbar * setup.D**4)
    Gamma = scale * alice.Q0
    gamma = scale * alice.delta_q
    phi0 = -setup.m * tau_e * units.G * alice.Q0 / (units.hbar * setup.D**3)
    return PhaseSet(
        phi_pp=phi0 + Gamma / 2 + gamma / 2,
        phi_pm=phi0 - Gamma / 2 - gamma / 2,
        phi_mp=phi0 + Gamma / 2 - gamma / 2,
        phi_mm=phi0 - Gamma / 2 + gamma / 2,
        Gamma=Gamma,
        gamma=gamma,
    )


def distinguishing_mass(D: Any, d: Any, tau_e: Any, delta_q: Any, units: UnitSystem = PLANCK) -> Any:
    """Mass for which γ reaches π/2: m = πħD⁴ / (12 G τ_e ΔQ d)."""
    _require_positive(D=D, d=d, tau_e=tau_e, delta_q=delta_q)
    return math.pi * units.hbar * D**4 / (12 * units.G * tau_e * delta_q * d)


# ---------------------------------------------------------------------- #
# Wavepackets and visibility
# ---------------------------------------------------------------------- #
def free_gaussian(t: float, x: Any, m: float, sigma: float, units: UnitSystem = PLANCK) -> np.ndarray:
    """Freely spreading Gaussian of initial width σ centred at the origin."""
    spread = 1.0 + 1j * units.hbar * t / (2.0 * m * sigma**2)
    x = np.asarray(x, dtype=float)
    return (2.0 * math.pi * sigma**2) ** -0.25 / np.sqrt(spread) * np.exp(-(x**2) / (4.0 * sigma**2 * spread))


def branch_amplitude(
    t: float,
    x: Any,
    sign: int,
    u: float,
    u_dot: float,
    alpha0: float,
    m: float,
    sigma: float,
    units: UnitSystem = PLANCK,
) -> np.ndarray:
    """e^{iα₀} e^{±iαx} ψ_f(t, x ∓ u) with α = m u̇ / ħ."""
    alpha = m * u_dot / units.hbar
    x = np.asarray(x, dtype=float)
    return np.exp(1j * alpha0 + sign * 1j * alpha * x) * free_gaussian(t, x - sign * u, m, sigma, units)


def _branch_sign(branch: str) -> int:
    if branch not in ("+", "-"):
        raise ValidationError(f"branch must be '+' or '-', got {branch!r}")
    return 1 if branch == "+" else -1


def wavepacket(
    t: float,
    x: Any,
    branch: str,
    path: ClassicalPath,
    m: float,
    sigma: float,
    units: UnitSystem = PLANCK,
) -> np.ndarray:
    """Bob's branch wavefunction ψ±(t, x) for a force ±F(t) along `path`."""
    _require_positive(m=m, sigma=sigma)
    sign = _branch_sign(branch)
    u = float(np.squeeze(path.position(t)))
    u_dot = float(np.squeeze(path.velocity(t)))
    alpha0 = -m / (2.0 * units.hbar) * path.kinetic_integral(t)
    return branch_amplitude(t, x, sign, u, u_dot, alpha0, m, sigma, units)


def visibility_at(t: float, u: float, u_dot: float, m: float, sigma: float, units: UnitSystem = PLANCK) -> float:
    """A = exp(−(u − t u̇)²/(2σ²) − 2(mσu̇/ħ)²)."""
    _require_positive(m=m, sigma=sigma)
    return float(np.exp(-((u - t * u_dot) ** 2) / (2.0 * sigma**2) - 2.0 * (m * sigma * u_dot / units.hbar) ** 2))


def visibility(t: float, path: ClassicalPath, m: float, sigma: float, units: UnitSystem = PLANCK) -> float:
    """Visibility |⟨ψ₊|ψ₋⟩| of Bob's two branches at time t."""
    u = float(np.squeeze(path.position(t)))
    u_dot = float(np.squeeze(path.velocity(t)))
    return visibility_at(t, u, u_dot, m, sigma, units)


def overlap_at(t: float, u: float, u_dot: float, m: float, sigma: float, units: UnitSystem = PLANCK) -> complex:
    """⟨ψ₊|ψ₋⟩ by adaptive quadrature over x (α₀ cancels between branches)."""
    width = sigma * math.sqrt(1.0 + (units.hbar * t / (2.0 * m * sigma**2)) ** 2)
    half = abs(u) + 14.0 * width

    def integrand(x: float) -> complex:
        plus = branch_amplitude(t, x, 1, u, u_dot, 0.0, m, sigma, units)
        minus = branch_amplitude(t, x, -1, u, u_dot, 0.0, m, sigma, units)
        return complex(np.conj(plus) * minus)

    points = sorted({-abs(u), 0.0, abs(u)})
    return quadrature.integrate_complex(integrand, -half, half, atol=1e-13, limit=1000, points=points)


def wavepacket_overlap(t: float, path: ClassicalPath, m: float, sigma: float, units: UnitSystem = PLANCK) -> complex:
    u = float(np.squeeze(path.position(t)))
    u_dot = float(np.squeeze(path.velocity(t)))
    return overlap_at(t, u, u_dot, m, sigma, units)


def expectation_O(branch: str, A: float, gamma: float) -> float:
    """⟨O⟩ on Alice's side: 1 + A for Q₊, 1 + A cos 2γ for Q₋."""
    if not 0.0 <= A <= 1.0:
        raise ValidationError(f"Visibility must lie in [0, 1], got {A!r}")
    sign = _branch_sign(branch)
    return 1.0 + A if sign > 0 else 1.0 + A * math.cos(2.0 * gamma)


# ---------------------------------------------------------------------- #
# Measurement window
# ---------------------------------------------------------------------- #
def sigma_factor(m: Any, sigma: Any, tau_a: Any, units: UnitSystem = PLANCK) -> Any:
    """ħτ_a/(2mσ²) + 2mσ²/(ħτ_a); minimal (= 2) at the optimal width."""
    ratio = units.hbar * tau_a / (2 * m * sigma**2)
    return ratio + 1 / ratio


def optimal_sigma(m: Any, tau_a: Any, units: UnitSystem = PLANCK) -> Any:
    """σ* = √(ħτ_a / (2m))."""
    _require_positive(m=m, tau_a=tau_a)
    return sqrt(units.hbar * tau_a / (2 * m))


def averaged_visibility(
    m: float,
    d: float,
    sigma: float,
    tau_a: float,
    delta_t: float,
    elapsed: Optional[float] = None,
    units: UnitSystem = PLANCK,
) -> float:
    """Linearized mean visibility over the last Δt of the closing.

    Near the end of the canonical closing u̇² ≈ 15 d² s / τ_a³, with s the
    time left. With `elapsed` omitted the clock in (u − t u̇) is τ_a; pass
    the actual elapsed time since preparation to use it instead.
    """
    _require_positive(m=m, d=d, sigma=sigma, tau_a=tau_a)
    if delta_t < 0:
        raise ValidationError(f"delta_t must be non-negative, got {delta_t!r}")
    if delta_t > 0.1 * tau_a:
        logger.warning("Linearized visibility used with Δt=%g not small against τ_a=%g", delta_t, tau_a)
    clock = tau_a if elapsed is None else elapsed
    spread_term = 15.0 * d**2 * delta_t * clock**2 / (4.0 * sigma**2 * tau_a**3)
    momentum_term = 15.0 * m**2 * sigma**2 * d**2 * delta_t / (units.hbar**2 * tau_a**3)
    return 1.0 - spread_term - momentum_term


def time_averaged_visibility(
    path: ClassicalPath,
    m: float,
    sigma: float,
    t_end: float,
    delta_t: float,
    clock: Optional[float] = None,
    units: UnitSystem = PLANCK,
) -> float:
    """(1/Δt)∫ A(t) dt over [t_end − Δt, t_end] by quadrature.

    `clock` fixes the t in (u − t u̇); by default it is the running time.
    """
    _require_positive(delta_t=delta_t)

    def integrand(t: float) -> float:
        u = float(np.squeeze(path.position(t)))
        u_dot = float(np.squeeze(path.velocity(t)))
        return visibility_at(t if clock is None else clock, u, u_dot, m, sigma, units)

    return quadrature.integrate_real(integrand, t_end - delta_t, t_end) / delta_t


def time_resolution_coefficient() -> float:
    """(v_max T / x0)² / 15 ≈ 0.1429."""
    return speed_ratio() ** 2 / 15.0


def required_time_resolution(m: Any, d: Any, tau_a: Any, units: UnitSystem = PLANCK) -> Any:
    """Δt keeping the visibility deficit below one at the optimal width: ħτ_a²/(15md²)."""
    _require_positive(m=m, d=d, tau_a=tau_a)
    return units.hbar * tau_a**2 / (15 * m * d**2)


def time_resolution_bound(m: Any, units: UnitSystem = PLANCK) -> Any:
    """Δt_max = 0.1429 ħ/(mc²) with the closing speed held below c."""
    _require_positive(m=m)
    return time_resolution_coefficient() * units.hbar / (m * units.c**2)


# ---------------------------------------------------------------------- #
# Grid oracle
# ---------------------------------------------------------------------- #
def split_operator_evolve(
    psi0: np.ndarray,
    x: np.ndarray,
    force: Callable[[float], float],
    m: float,
    t_final: float,
    dt: float,
    sign: int = 1,
    units: UnitSystem = PLANCK,
) -> np.ndarray:
    """Strang-split FFT propagation of iħψ̇ = (p²/2m ∓ F(t)x)ψ on a periodic grid.

    The force is sampled at step midpoints; t_final must be a whole number
    of steps so breakpoints can be aligned with step boundaries.
    """
    steps = int(round(t_final / dt))
    if steps < 1 or abs(steps * dt - t_final) > 1e-9 * max(t_final, dt):
        raise ValidationError(f"t_final={t_final} is not a whole number of steps dt={dt}")
    dx = x[1] - x[0]
    k = 2.0 * np.pi * np.fft.fftfreq(x.size, d=dx)
    kinetic = np.exp(-1j * units.hbar * k**2 * dt / (2.0 * m))
    psi = np.asarray(psi0, dtype=complex).copy()
    for step in range(steps):
        mid = (step + 0.5) * dt
        half_kick = np.exp(1j * sign * force(mid) * x * dt / (2.0 * units.hbar))
        psi = half_kick * psi
        psi = np.fft.ifft(kinetic * np.fft.fft(psi))
        psi = half_kick * psi
    return psi
