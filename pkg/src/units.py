"""
units.py

Dimension-checked quantities, the CODATA 2018 constant record and the
conversion between SI and Planck units.

All numerical modules take a ``UnitSystem`` and evaluate formulas with plain
operators, so the same code runs on floats (``PLANCK``, ``SI``) and on
``PhysicalQuantity`` values (``SI.dimensioned()``) for dimension audits.
"""

from __future__ import annotations

import json
import math
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict, Union

import numpy as np

from src.errors import DimensionError, NonFiniteError

Number = Union[int, float]


@dataclass(frozen=True)
class Dimension:
    """Integer exponents of mass, length, time and charge."""

    mass_exp: int = 0
    length_exp: int = 0
    time_exp: int = 0
    charge_exp: int = 0

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.mass_exp, self.length_exp, self.time_exp, self.charge_exp)

    def __mul__(self, other: "Dimension") -> "Dimension":
        return Dimension(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def __truediv__(self, other: "Dimension") -> "Dimension":
        return Dimension(*(a - b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def __pow__(self, power: int) -> "Dimension":
        if not isinstance(power, int):
            raise DimensionError("Dimensions only support integer powers")
        return Dimension(*(a * power for a in self.as_tuple()))

    def root(self) -> "Dimension":
        if any(a % 2 for a in self.as_tuple()):
            raise DimensionError(f"Square root of {self} has fractional exponents")
        return Dimension(*(a // 2 for a in self.as_tuple()))

    def __str__(self) -> str:
        names = ("kg", "m", "s", "C")
        parts = [f"{n}^{e}" for n, e in zip(names, self.as_tuple()) if e]
        return " ".join(parts) or "1"


DIMENSIONLESS = Dimension()
MASS = Dimension(mass_exp=1)
LENGTH = Dimension(length_exp=1)
TIME = Dimension(time_exp=1)
CHARGE = Dimension(charge_exp=1)
SPEED = LENGTH / TIME
ENERGY = MASS * LENGTH**2 / TIME**2
ACTION = ENERGY * TIME
RATE = TIME**-1
QUADRUPOLE = MASS * LENGTH**2
SPECIFIC_ENERGY = LENGTH**2 / TIME**2
FIELD_STRENGTH = ENERGY / (CHARGE * LENGTH)

DIMENSIONS: Dict[str, Dimension] = {
    "dimensionless": DIMENSIONLESS,
    "mass": MASS,
    "length": LENGTH,
    "time": TIME,
    "charge": CHARGE,
    "speed": SPEED,
    "energy": ENERGY,
    "rate": RATE,
    "quadrupole": QUADRUPOLE,
    "field_strength": FIELD_STRENGTH,
}


@dataclass(frozen=True)
class PhysicalQuantity:
    """A finite real value tagged with its dimension."""

    value: float
    dim: Dimension = DIMENSIONLESS

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise NonFiniteError(f"Non-finite quantity value: {self.value!r}")

    # ------------------------------------------------------------------ #
    # Arithmetic
    # ------------------------------------------------------------------ #
    def _coerce(self, other: Any) -> "PhysicalQuantity":
        if isinstance(other, PhysicalQuantity):
            return other
        return PhysicalQuantity(float(other), DIMENSIONLESS)

    def _same_dim(self, other: "PhysicalQuantity", op: str) -> None:
        if self.dim != other.dim:
            raise DimensionError(f"Cannot {op} [{self.dim}] and [{other.dim}]")

    def __add__(self, other: Any) -> "PhysicalQuantity":
        other = self._coerce(other)
        self._same_dim(other, "add")
        return PhysicalQuantity(self.value + other.value, self.dim)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "PhysicalQuantity":
        other = self._coerce(other)
        self._same_dim(other, "subtract")
        return PhysicalQuantity(self.value - other.value, self.dim)

    def __rsub__(self, other: Any) -> "PhysicalQuantity":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "PhysicalQuantity":
        other = self._coerce(other)
        return PhysicalQuantity(self.value * other.value, self.dim * other.dim)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "PhysicalQuantity":
        other = self._coerce(other)
        return PhysicalQuantity(self.value / other.value, self.dim / other.dim)

    def __rtruediv__(self, other: Any) -> "PhysicalQuantity":
        return self._coerce(other) / self

    def __pow__(self, power: int) -> "PhysicalQuantity":
        return PhysicalQuantity(self.value**power, self.dim**power)

    def __neg__(self) -> "PhysicalQuantity":
        return PhysicalQuantity(-self.value, self.dim)

    def __abs__(self) -> "PhysicalQuantity":
        return PhysicalQuantity(abs(self.value), self.dim)

    def sqrt(self) -> "PhysicalQuantity":
        return PhysicalQuantity(math.sqrt(self.value), self.dim.root())

    # ------------------------------------------------------------------ #
    # Comparison
    # ------------------------------------------------------------------ #
    def __lt__(self, other: Any) -> bool:
        other = self._coerce(other)
        self._same_dim(other, "compare")
        return self.value < other.value

    def __gt__(self, other: Any) -> bool:
        other = self._coerce(other)
        self._same_dim(other, "compare")
        return self.value > other.value

    def __le__(self, other: Any) -> bool:
        return not self > other

    def __ge__(self, other: Any) -> bool:
        return not self < other

    def __float__(self) -> float:
        if self.dim != DIMENSIONLESS:
            raise DimensionError(f"Quantity with dimension [{self.dim}] is not a pure number")
        return self.value


def sqrt(x: Any) -> Any:
    """Square root that keeps dimensions when given a PhysicalQuantity."""
    if isinstance(x, PhysicalQuantity):
        return x.sqrt()
    return np.sqrt(x)


def dim_check(a: PhysicalQuantity, b: PhysicalQuantity) -> bool:
    """True iff both quantities carry the same dimension vector."""
    return a.dim == b.dim


def dimension_of(x: Any) -> Dimension:
    return x.dim if isinstance(x, PhysicalQuantity) else DIMENSIONLESS


# ---------------------------------------------------------------------- #
# Constants
# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class CodataConstants:
    """CODATA 2018 recommended values in SI (single source of truth)."""

    G: float = 6.67430e-11
    hbar: float = 1.054571817e-34
    c: float = 299792458.0
    k_e: float = 8.9875517923e9
    e: float = 1.602176634e-19
    m_proton: float = 1.67262192369e-27
    m_electron: float = 9.1093837015e-31
    electron_volt: float = 1.602176634e-19

    @property
    def m_P(self) -> float:
        return math.sqrt(self.hbar * self.c / self.G)

    @property
    def l_P(self) -> float:
        return math.sqrt(self.hbar * self.G / self.c**3)

    @property
    def t_P(self) -> float:
        return self.l_P / self.c

    @property
    def E_P(self) -> float:
        return self.m_P * self.c**2

    @property
    def q_P(self) -> float:
        return math.sqrt(self.hbar * self.c / self.k_e)

    @property
    def fine_structure(self) -> float:
        return self.k_e * self.e**2 / (self.hbar * self.c)

    def planck_scale(self, dim: Dimension) -> float:
        """SI size of the Planck unit carrying dimension ``dim``."""
        return (
            self.m_P**dim.mass_exp
            * self.l_P**dim.length_exp
            * self.t_P**dim.time_exp
            * self.q_P**dim.charge_exp
        )

    def as_document(self) -> Dict[str, float]:
        return {"G": self.G, "hbar": self.hbar, "c": self.c, "k_e": self.k_e, "e": self.e}


CODATA_2018 = CodataConstants()


def export_constants(path: str | pathlib.Path, constants: CodataConstants = CODATA_2018) -> pathlib.Path:
    """Write the SI constants as ``constants.json``-style document."""
    p = pathlib.Path(path)
    p.write_text(json.dumps(constants.as_document(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return p


@dataclass(frozen=True)
class UnitSystem:
    """Values of G, ħ, c, k_e and e in one unit convention.

    The Planck system sets G = ħ = c = k_e = 1, so the elementary charge
    becomes the square root of the fine-structure constant.
    """

    name: str
    G: Any
    hbar: Any
    c: Any
    k_e: Any
    e: Any
    m_proton: Any = field(default=None)
    m_electron: Any = field(default=None)
    electron_volt: Any = field(default=None)

    @property
    def m_P(self) -> Any:
        return sqrt(self.hbar * self.c / self.G)

    @property
    def l_P(self) -> Any:
        return sqrt(self.hbar * self.G / self.c**3)

    @property
    def t_P(self) -> Any:
        return self.l_P / self.c

    @property
    def E_P(self) -> Any:
        return self.m_P * self.c**2

    @property
    def epsilon_0(self) -> Any:
        return 1.0 / (4.0 * math.pi * self.k_e)

    @classmethod
    def si(cls, constants: CodataConstants = CODATA_2018) -> "UnitSystem":
        return cls(
            name="si",
            G=constants.G,
            hbar=constants.hbar,
            c=constants.c,
            k_e=constants.k_e,
            e=constants.e,
            m_proton=constants.m_proton,
            m_electron=constants.m_electron,
            electron_volt=constants.electron_volt,
        )

    @classmethod
    def planck(cls, constants: CodataConstants = CODATA_2018) -> "UnitSystem":
        return cls(
            name="planck",
            G=1.0,
            hbar=1.0,
            c=1.0,
            k_e=1.0,
            e=constants.e / constants.q_P,
            m_proton=constants.m_proton / constants.m_P,
            m_electron=constants.m_electron / constants.m_P,
            electron_volt=constants.electron_volt / constants.E_P,
        )

    @classmethod
    def dimensioned(cls, constants: CodataConstants = CODATA_2018) -> "UnitSystem":
        """SI values wrapped in PhysicalQuantity for dimension audits."""
        return cls(
            name="si-dimensioned",
            G=PhysicalQuantity(constants.G, LENGTH**3 / (MASS * TIME**2)),
            hbar=PhysicalQuantity(constants.hbar, ACTION),
            c=PhysicalQuantity(constants.c, SPEED),
            k_e=PhysicalQuantity(constants.k_e, ENERGY * LENGTH / CHARGE**2),
            e=PhysicalQuantity(constants.e, CHARGE),
            m_proton=PhysicalQuantity(constants.m_proton, MASS),
            m_electron=PhysicalQuantity(constants.m_electron, MASS),
            electron_volt=PhysicalQuantity(constants.electron_volt, ENERGY),
        )


PLANCK = UnitSystem.planck()
SI = UnitSystem.si()


def unit_system(mode: str) -> UnitSystem:
    """Look up a unit system by its CLI name."""
    systems = {"planck": PLANCK, "si": SI}
    try:
        return systems[mode]
    except KeyError:
        allowed = ", ".join(sorted(systems))
        raise DimensionError(f"Unknown unit mode '{mode}'. Allowed values: {allowed}") from None


# ---------------------------------------------------------------------- #
# SI <-> Planck
# ---------------------------------------------------------------------- #
def to_planck(q: PhysicalQuantity, constants: CodataConstants = CODATA_2018) -> PhysicalQuantity:
    """Rescale an SI quantity so that the matching Planck unit equals 1."""
    if not math.isfinite(q.value):
        raise NonFiniteError(f"Cannot convert non-finite value {q.value!r}")
    return PhysicalQuantity(q.value / constants.planck_scale(q.dim), q.dim)


def from_planck(q: PhysicalQuantity, constants: CodataConstants = CODATA_2018) -> PhysicalQuantity:
    """Inverse of :func:`to_planck`."""
    if not math.isfinite(q.value):
        raise NonFiniteError(f"Cannot convert non-finite value {q.value!r}")
    return PhysicalQuantity(q.value * constants.planck_scale(q.dim), q.dim)
