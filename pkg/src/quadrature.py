"""
quadrature.py

Thin wrappers around scipy's adaptive Gauss-Kronrod quadrature (QUADPACK)
that turn silent accuracy warnings into NumericalError.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from src.errors import NumericalError

logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-14


def integrate_real(
    func: Callable[[float], float],
    a: float,
    b: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    limit: int = 500,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Adaptive quadrature of a real integrand on [a, b].

    Raises:
        NumericalError: If QUADPACK reports a failure or the error estimate
            exceeds the requested tolerance by more than a factor of ten.
    """
    result = integrate.quad(
        func, a, b, epsabs=atol, epsrel=rtol, limit=limit, points=points, full_output=1
    )
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3:
        raise NumericalError(f"Quadrature did not converge on [{a}, {b}]: {result[3]}", value, abserr)
    allowed = 10.0 * max(atol, rtol * abs(value))
    if abserr > allowed:
        raise NumericalError(f"Quadrature tolerance not met on [{a}, {b}]", value, abserr)
    return value


def integrate_complex(
    func: Callable[[float], complex],
    a: float,
    b: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    limit: int = 500,
    points: Optional[Sequence[float]] = None,
) -> complex:
    """Adaptive quadrature of a complex integrand, real and imaginary parts separately."""
    re = integrate_real(lambda x: float(np.real(func(x))), a, b, rtol, atol, limit, points)
    im = integrate_real(lambda x: float(np.imag(func(x))), a, b, rtol, atol, limit, points)
    return complex(re, im)


def simpson(func: Callable[[np.ndarray], np.ndarray], a: float, b: float, intervals: int) -> float:
    """Composite Simpson rule on a uniform grid with an even number of intervals."""
    if intervals % 2:
        intervals += 1
    x = np.linspace(a, b, intervals + 1)
    return float(integrate.simpson(func(x), x=x))
