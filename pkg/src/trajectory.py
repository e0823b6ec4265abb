"""
trajectory.py

Quadrupole-closing trajectories and the radiated gravitational-wave energy.

A closing shape is ξ(τ) = √P(τ) on τ ∈ [0, 1] with ξ(0) = 1, ξ(1) = 0 and
vanishing slope at both ends. Writing P(τ) = (1−τ)³ q(τ) with q(0) = 1 and
q'(0) = 3 satisfies all four boundary conditions identically, so shapes are
stored through q. The radiation action is

    S = ∫₀¹ (ξ ξ''' + 3 ξ' ξ'')² dτ = ¼ ∫₀¹ (P''')² dτ,

and the radiated energy is E = 4 G ΔQ² S / (5 c⁵ T⁵).
"""

from __future__ import annotations

import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy import interpolate, optimize

from src import quadrature
from src.errors import NumericalError, ValidationError
from src.units import PLANCK, UnitSystem

logger = logging.getLogger(__name__)

OPTIMAL_A = -10.0 / 3.0
S_MIN = 80.0
SCAN_POINTS = 10_000
BOUNDARY_TOL = 1e-8

_ONE_MINUS_TAU = Polynomial([1.0, -1.0])


def _value(x: Any) -> float:
    return float(getattr(x, "value", x))


def _require_positive(name: str, x: Any) -> None:
    if not _value(x) > 0:
        raise ValidationError(f"{name} must be positive, got {_value(x)!r}")


# ---------------------------------------------------------------------- #
# Shapes
# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class ClosingShape:
    """ξ = √((1−τ)³ q(τ)) for a polynomial q with q(0) = 1 and q'(0) = 3."""

    q: Polynomial

    @classmethod
    def from_free_coefficients(cls, coefficients: Sequence[float]) -> "ClosingShape":
        """Build q = 1 + 3τ + c₂τ² + c₃τ³ + … from the free coefficients c₂, c₃, …"""
        return cls(Polynomial([1.0, 3.0, *map(float, coefficients)]))

    @property
    def squared(self) -> Polynomial:
        return _ONE_MINUS_TAU**3 * self.q

    @property
    def degree(self) -> int:
        return self.squared.degree()

    def is_admissible(self) -> bool:
        """P > 0 on [0, 1): grid scan plus the interior minima of q."""
        grid = np.linspace(0.0, 1.0, SCAN_POINTS + 1)[:-1]
        if np.any(self.q(grid) <= 0.0):
            return False
        stationary = self.q.deriv().roots()
        real = stationary[np.abs(stationary.imag) < 1e-12].real
        inside = real[(real >= 0.0) & (real < 1.0)]
        return bool(np.all(self.q(inside) > 0.0))

    def xi(self, tau: Any) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        return np.sqrt(np.clip(1.0 - tau, 0.0, None) ** 3 * np.clip(self.q(tau), 0.0, None))

    def xi_dot(self, tau: Any) -> np.ndarray:
        """dξ/dτ = √(1−τ) (−3q + (1−τ) q') / (2√q), finite up to τ = 1."""
        tau = np.asarray(tau, dtype=float)
        q = self.q(tau)
        numerator = -3.0 * q + (1.0 - tau) * self.q.deriv()(tau)
        return np.sqrt(np.clip(1.0 - tau, 0.0, None)) * numerator / (2.0 * np.sqrt(q))

    def xi_ddot(self, tau: Any) -> np.ndarray:
        """d²ξ/dτ² from P = ξ²; diverges like (1−τ)^(-1/2) at τ = 1."""
        tau = np.asarray(tau, dtype=float)
        xi = self.xi(tau)
        return (self.squared.deriv(2)(tau) - 2.0 * self.xi_dot(tau) ** 2) / (2.0 * xi)

    def direct_integrand(self, tau: Any) -> np.ndarray:
        """ξ ξ''' + 3 ξ' ξ'' from ξ derivatives alone (valid away from τ = 1)."""
        tau = np.asarray(tau, dtype=float)
        xi, xi1, xi2 = self.xi(tau), self.xi_dot(tau), self.xi_ddot(tau)
        xi3 = (self.squared.deriv(3)(tau) - 6.0 * xi1 * xi2) / (2.0 * xi)
        return xi * xi3 + 3.0 * xi1 * xi2


@dataclass(frozen=True)
class TrajectoryFamilyParam:
    """The one-parameter family P_a = 1 + aτ² − (10+3a)τ³ + (15+3a)τ⁴ − (6+a)τ⁵."""

    a: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.a):
            raise ValidationError(f"Family parameter must be finite, got {self.a!r}")
        if not self.shape.is_admissible():
            raise ValidationError(f"P_a is not positive on [0, 1) for a = {self.a!r}")

    @property
    def shape(self) -> ClosingShape:
        return ClosingShape(Polynomial([1.0, 3.0, 6.0 + self.a]))

    @property
    def squared(self) -> Polynomial:
        return self.shape.squared

    def xi(self, tau: Any) -> np.ndarray:
        return self.shape.xi(tau)

    def xi_dot(self, tau: Any) -> np.ndarray:
        return self.shape.xi_dot(tau)


def admissible_range() -> Tuple[float, float]:
    """Closed-form admissible interval of a (the quadratic factor stays positive)."""
    return (-10.0, float("inf"))


OPTIMAL = TrajectoryFamilyParam(OPTIMAL_A)


@dataclass(frozen=True)
class SampledTrajectory:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    x0: float
    T: float


@dataclass(frozen=True)
class RadiationResult:
    S: float
    E: Any
    v_max: Any


# ---------------------------------------------------------------------- #
# Radiation action
# ---------------------------------------------------------------------- #
ShapeLike = Union[TrajectoryFamilyParam, ClosingShape, SampledTrajectory, Callable[[np.ndarray], np.ndarray]]


def _squared_derivatives(xi: ShapeLike, spline_nodes: int) -> Tuple[Callable, Callable, Callable, Callable, Sequence[float]]:
    """Return callables P, P', P'', P''' and quadrature break points."""
    if isinstance(xi, (TrajectoryFamilyParam, ClosingShape)):
        p = xi.squared
        return p, p.deriv(1), p.deriv(2), p.deriv(3), ()
    if isinstance(xi, SampledTrajectory):
        nodes = xi.times / xi.T
        values = (xi.positions / xi.x0) ** 2
    else:
        nodes = np.linspace(0.0, 1.0, spline_nodes)
        values = np.asarray(xi(nodes), dtype=float) ** 2
    # A quintic spline reproduces any quintic P exactly.
    spline = interpolate.make_interp_spline(nodes, values, k=5)
    breaks = tuple(np.unique(spline.t[(spline.t > 0.0) & (spline.t < 1.0)]))
    return spline, spline.derivative(1), spline.derivative(2), spline.derivative(3), breaks


def s_functional(
    xi: ShapeLike,
    quadrature_tol: float = 1e-10,
    spline_nodes: int = 101,
    quadrature_atol: float = quadrature.DEFAULT_ATOL,
) -> float:
    """Radiation action S of a closing shape.

    Args:
        xi: A family member, a ClosingShape, a SampledTrajectory, or any
            callable ξ(τ) on [0, 1] (fitted through ξ² with a quintic spline).
        quadrature_tol: Relative tolerance of the adaptive quadrature.
        spline_nodes: Interpolation nodes used for plain callables.
        quadrature_atol: Absolute tolerance of the adaptive quadrature.

    Raises:
        ValidationError: If a boundary condition is violated.
        NumericalError: If the quadrature does not converge.
    """
    p, p1, p2, p3, breaks = _squared_derivatives(xi, spline_nodes)
    checks = {
        "xi(0) = 1": float(p(0.0)) - 1.0,
        "xi(1) = 0": float(p(1.0)),
        "xi'(0) = 0": float(p1(0.0)),
        "xi'(1) = 0 (P'(1))": float(p1(1.0)),
        "xi'(1) = 0 (P''(1))": float(p2(1.0)),
    }
    for label, residual in checks.items():
        if abs(residual) > BOUNDARY_TOL:
            raise ValidationError(f"Boundary condition {label} violated by {residual:.3e}")
    return 0.25 * quadrature.integrate_real(
        lambda t: float(p3(t)) ** 2,
        0.0,
        1.0,
        rtol=quadrature_tol,
        atol=quadrature_atol,
        limit=max(500, 4 * len(breaks)),
        points=breaks or None,
    )


def s_closed_form(a: float) -> float:
    """S(a) = 180 + 60a + 9a² for an admissible family member."""
    TrajectoryFamilyParam(a)
    return 180.0 + 60.0 * a + 9.0 * a**2


# ---------------------------------------------------------------------- #
# Optimal trajectory and kinematics
# ---------------------------------------------------------------------- #
def optimal_trajectory(x0: float, T: float, n_samples: int) -> SampledTrajectory:
    """Sample x(t) = x0 √(1 − 10t²/3T² + 5t⁴/T⁴ − 8t⁵/3T⁵) on a uniform grid."""
    _require_positive("x0", x0)
    _require_positive("T", T)
    if n_samples < 2:
        raise ValidationError(f"n_samples must be at least 2, got {n_samples}")
    times = np.linspace(0.0, T, n_samples)
    tau = times / T
    positions = x0 * OPTIMAL.xi(tau)
    positions[0], positions[-1] = x0, 0.0
    velocities = x0 / T * OPTIMAL.xi_dot(tau)
    velocities[0] = velocities[-1] = 0.0
    return SampledTrajectory(times=times, positions=positions, velocities=velocities, x0=x0, T=T)


def peak_speed_point(shape: ClosingShape = OPTIMAL.shape) -> Tuple[float, float]:
    """Location τ* and value |ξ'(τ*)| of the peak closing speed.

    The extrema of ξ' are the roots of 2PP'' − P'², which carries a factor
    (1−τ)⁴; the remaining polynomial is bracketed on a grid and refined
    with Brent's method.
    """
    p = shape.squared
    g = 2.0 * p * p.deriv(2) - p.deriv() ** 2
    reduced, _ = divmod(g, _ONE_MINUS_TAU**4)
    grid = np.linspace(1e-9, 1.0 - 1e-9, 2001)
    values = reduced(grid)
    candidates = []
    for left, right, fl, fr in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fl == 0.0 or fl * fr < 0.0:
            candidates.append(optimize.brentq(reduced, left, right, xtol=1e-15, rtol=1e-13))
    if not candidates:
        raise NumericalError("No interior extremum of the closing speed was bracketed")
    speeds = np.abs(shape.xi_dot(np.array(candidates)))
    best = int(np.argmax(speeds))
    return float(candidates[best]), float(speeds[best])


@functools.lru_cache(maxsize=None)
def speed_ratio() -> float:
    """v_max T / x0 for the optimal trajectory (≈ 1.464)."""
    return peak_speed_point()[1]


def max_speed(x0: Any, T: Any) -> Any:
    """Peak |dx/dt| along the optimal trajectory."""
    _require_positive("x0", x0)
    _require_positive("T", T)
    return speed_ratio() * x0 / T


def subluminal_ratio() -> float:
    """Largest x0 / (cT) keeping the optimal closing below light speed (≈ 0.683)."""
    return 1.0 / speed_ratio()


@functools.lru_cache(maxsize=None)
def kappa() -> float:
    """κ = 2∫₀¹ ξ_opt dτ, the acceleration-phase weight of the effective time."""
    return 2.0 * quadrature.integrate_real(lambda t: float(OPTIMAL.xi(t)), 0.0, 1.0)


def effective_time(tau_f: Any, tau_a: Any) -> Any:
    """τ_e = τ_f + κ τ_a."""
    if _value(tau_f) < 0 or _value(tau_a) < 0:
        raise ValidationError("tau_f and tau_a must be non-negative")
    return tau_f + kappa() * tau_a


# ---------------------------------------------------------------------- #
# Radiated energy
# ---------------------------------------------------------------------- #
def radiated_energy(delta_q: Any, T: Any, S: float, units: UnitSystem = PLANCK) -> Any:
    """E = 4 G ΔQ² S / (5 c⁵ T⁵)."""
    _require_positive("T", T)
    return 4.0 * units.G * delta_q**2 * S / (5.0 * units.c**5 * T**5)


def min_radiated_energy(delta_q: Any, T: Any, units: UnitSystem = PLANCK) -> Any:
    """E_min = 64 G ΔQ² / (c⁵ T⁵)."""
    _require_positive("T", T)
    return 64.0 * units.G * delta_q**2 / (units.c**5 * T**5)


def radiated_power(delta_q: float, T: float, n_samples: int, units: UnitSystem = PLANCK) -> Tuple[np.ndarray, np.ndarray]:
    """dE/dt = G ΔQ² P'''(t/T)² / (5 c⁵ T⁶) along the optimal closing."""
    _require_positive("T", T)
    times = np.linspace(0.0, T, n_samples)
    jerk = OPTIMAL.squared.deriv(3)(times / T)
    return times, units.G * delta_q**2 * jerk**2 / (5.0 * units.c**5 * T**6)


def radiation_result(delta_q: Any, T: Any, x0: Any, a: float = OPTIMAL_A, units: UnitSystem = PLANCK) -> RadiationResult:
    family = TrajectoryFamilyParam(a)
    S = s_functional(family)
    _, peak = peak_speed_point(family.shape)
    return RadiationResult(S=S, E=radiated_energy(delta_q, T, S, units), v_max=peak * x0 / T)


# ---------------------------------------------------------------------- #
# Brute-force oracle
# ---------------------------------------------------------------------- #
_PENALTY = 1e12


def _objective(coefficients: np.ndarray) -> float:
    shape = ClosingShape.from_free_coefficients(coefficients)
    if not shape.is_admissible():
        return _PENALTY
    try:
        return s_functional(shape)
    except (ValidationError, NumericalError):
        return _PENALTY


def _restart(start: np.ndarray) -> Tuple[np.ndarray, float]:
    result = optimize.minimize(
        _objective,
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20_000, "maxfev": 40_000},
    )
    return np.asarray(result.x, dtype=float), float(result.fun)


def brute_force_minimize(
    degree: int,
    n_restarts: int = 32,
    seed: int = 0,
    workers: int = 1,
) -> Tuple[np.ndarray, float]:
    """Derivative-free search for the smallest S among √(polynomial) shapes.

    Every restart starts from a seeded random point; restarts may run on a
    thread pool, and the reduction walks them in restart order so the
    result does not depend on scheduling.

    Returns:
        Coefficients of P (ascending powers) and the best S found.

    Raises:
        ValidationError: If degree < 5 or no restart reaches an admissible shape.
    """
    if degree < 5:
        raise ValidationError(f"degree must be at least 5, got {degree}")
    rng = np.random.default_rng(seed)
    starts = [rng.normal(6.0, 3.0, size=degree - 4) for _ in range(n_restarts)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_restart, starts))
    else:
        results = [_restart(start) for start in starts]

    best_index, best_value = -1, _PENALTY
    for index, (_, value) in enumerate(results):
        if value < best_value:
            best_index, best_value = index, value
    if best_index < 0:
        raise ValidationError("All restarts failed the positivity validation")
    shape = ClosingShape.from_free_coefficients(results[best_index][0])
    logger.info("brute force degree=%d best S=%.12g (restart %d)", degree, best_value, best_index)
    return shape.squared.coef.copy(), best_value
