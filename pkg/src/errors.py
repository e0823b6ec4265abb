"""
errors.py

Exception hierarchy shared by the numerical modules.
"""

from __future__ import annotations

from typing import Optional


class GravityChainError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GravityChainError, ValueError):
    """Raised when inputs violate a documented precondition."""


class DimensionError(ValidationError):
    """Raised when quantities with different dimensions are combined."""


class NonFiniteError(ValidationError):
    """Raised when a quantity would carry NaN or infinity."""


class PoleError(ValidationError):
    """Raised when a drive frequency sits on a second-order pole."""


class NumericalError(GravityChainError, RuntimeError):
    """Raised when quadrature or ODE integration misses its tolerance.

    Attributes:
        estimate: Best value achieved before giving up, if any.
        error: Error estimate reported by the integrator, if any.
    """

    def __init__(
        self,
        message: str,
        estimate: Optional[float] = None,
        error: Optional[float] = None,
    ) -> None:
        if estimate is not None:
            message = f"{message} (achieved estimate {estimate!r}, error {error!r})"
        super().__init__(message)
        self.estimate = estimate
        self.error = error
