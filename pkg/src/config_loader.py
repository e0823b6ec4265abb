"""
config_loader.py

Run configuration (config.yml) and scenario files (JSON, TOML or YAML).
"""

from __future__ import annotations

import copy
import json
import logging
import pathlib
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Dict, Literal, Optional, Tuple

import pydantic
import yaml
from pydantic import BaseModel, ConfigDict

from src.errors import GravityChainError
from src.interferometry import AliceQuadrupole, InterferometerSetup
from src.feasibility import InternalEnergies
from src.units import (
    CHARGE,
    ENERGY,
    LENGTH,
    MASS,
    QUADRUPOLE,
    RATE,
    TIME,
    Dimension,
    PhysicalQuantity,
    to_planck,
)

logger = logging.getLogger(__name__)


class ConfigError(GravityChainError):
    """Raised whenever a configuration or scenario file is missing fields or has invalid data."""


class ConfigLoader:
    """
    Loads and validates the YAML run configuration.

    Usage:
        loader = ConfigLoader()
        config = loader.load_config("config.yml")
    """

    _REQUIRED_FIELDS: Dict[Tuple[str, ...], type | Tuple[type, ...]] = {
        ("units", "mode"): str,
        ("quadrature", "rtol"): (int, float),
        ("quadrature", "atol"): (int, float),
        ("trajectory", "samples"): int,
        ("optimizer", "restarts"): int,
        ("optimizer", "seed"): int,
        ("sweep", "workers"): int,
        ("audit", "enabled"): bool,
        ("audit", "path"): str,
        ("logging", "level"): str,
    }

    _VALID_UNIT_MODES = {"planck", "si"}
    _VALID_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR"}

    _DEFAULTS: Dict[Tuple[str, ...], Any] = {
        ("units", "mode"): "planck",
        ("quadrature", "rtol"): 1e-10,
        ("quadrature", "atol"): 1e-14,
        ("trajectory", "samples"): 201,
        ("optimizer", "restarts"): 32,
        ("optimizer", "seed"): 0,
        ("sweep", "workers"): 1,
        ("audit", "enabled"): True,
        ("audit", "path"): "logs/audit.log",
        ("logging", "level"): "WARNING",
    }

    # --------------------------------------------------------------------- #
    # Public API
    # --------------------------------------------------------------------- #
    def load_config(self, path: str | pathlib.Path) -> Dict[str, Any]:
        """
        Read config.yml, fill in every key it leaves out and check the result.

        Args:
            path: Location of the run configuration.

        Returns:
            The merged configuration, nested by section.

        Raises:
            ConfigError: On a missing file, a YAML syntax error, a wrong type
                or a value outside its allowed set.
        """
        return self._finish(_read_mapping(pathlib.Path(path), "Configuration"))

    def default_config(self) -> Dict[str, Any]:
        """Configuration built from the defaults alone."""
        return self._finish({})

    # --------------------------------------------------------------------- #
    # Checks
    # --------------------------------------------------------------------- #
    def _finish(self, config: Dict[str, Any]) -> Dict[str, Any]:
        self._apply_defaults(config)
        self._validate_required_fields(config)
        self._validate_choice(config, ("units", "mode"), self._VALID_UNIT_MODES)
        self._validate_choice(config, ("logging", "level"), self._VALID_LOG_LEVELS)
        for field_path in (("trajectory", "samples"), ("optimizer", "restarts"), ("sweep", "workers")):
            if _lookup(config, field_path) < 1:
                raise ConfigError(f"Field {'.'.join(field_path)} must be at least 1")
        return config

    def _apply_defaults(self, config: Dict[str, Any]) -> None:
        for (*sections, key), default_value in self._DEFAULTS.items():
            node: Any = config
            for section in sections:
                node = node.setdefault(section, {}) if isinstance(node, dict) else None
            if isinstance(node, dict):
                node.setdefault(key, copy.copy(default_value))

    def _validate_required_fields(self, config: Dict[str, Any]) -> None:
        for field_path, expected_type in self._REQUIRED_FIELDS.items():
            name = ".".join(field_path)
            value = _lookup(config, field_path)
            if value is None:
                raise ConfigError(f"Missing required field: {name}")
            wrong_bool = expected_type is not bool and isinstance(value, bool)
            if wrong_bool or not isinstance(value, expected_type):
                types = expected_type if isinstance(expected_type, tuple) else (expected_type,)
                raise ConfigError(
                    f"Invalid type for field {name}: expected {' or '.join(t.__name__ for t in types)}, "
                    f"got {type(value).__name__}"
                )

    def _validate_choice(self, config: Dict[str, Any], field_path: Tuple[str, ...], allowed: set) -> None:
        value = _lookup(config, field_path)
        if value not in allowed:
            raise ConfigError(f"Invalid {'.'.join(field_path)} '{value}'. Allowed values: {', '.join(sorted(allowed))}")


def _lookup(data: Dict[str, Any], path: Tuple[str, ...]) -> Any | None:
    """Value at a dotted path, or None if any level is absent."""
    node: Any = data
    for key in path:
        node = node.get(key) if isinstance(node, dict) else None
    return node


def _read_mapping(p: pathlib.Path, label: str) -> Dict[str, Any]:
    """Parse a JSON, TOML or YAML file whose top level must be a mapping."""
    if not p.is_file():
        raise ConfigError(f"{label} file not found: {p}")
    text = p.read_text(encoding="utf-8")
    suffix = p.suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(text)
        elif suffix == ".toml":
            data = tomllib.loads(text)
        elif suffix in (".yml", ".yaml"):
            data = yaml.safe_load(text) or {}
        else:
            raise ConfigError(f"Unsupported {label.lower()} format: {p.suffix or '<none>'}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Failed to parse JSON at line {exc.lineno}: {exc.msg}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"Failed to parse TOML: {exc}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"Failed to parse YAML{where}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Top-level {label.lower()} structure must be a mapping.")
    return data


# ------------------------------------------------------------------------- #
# Scenarios
# ------------------------------------------------------------------------- #
SCENARIO_DIMENSIONS: Dict[str, Dimension] = {
    "m": MASS,
    "m1": MASS,
    "m2": MASS,
    "E0": ENERGY,
    "E1": ENERGY,
    "d": LENGTH,
    "D": LENGTH,
    "sigma": LENGTH,
    "tau_a": TIME,
    "tau_f": TIME,
    "T": TIME,
    "delta_t": TIME,
    "Q0": QUADRUPOLE,
    "delta_q": QUADRUPOLE,
    "q": CHARGE,
    "omega": RATE,
    "V": LENGTH**3,
}


class ScenarioConfig(BaseModel):
    """Physical inputs of one run; keys outside this model are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    unit_mode: Literal["planck", "si"] = "planck"
    m: Optional[float] = None
    E0: Optional[float] = None
    E1: Optional[float] = None
    d: Optional[float] = None
    D: Optional[float] = None
    tau_a: Optional[float] = None
    tau_f: Optional[float] = None
    T: Optional[float] = None
    sigma: Optional[float] = None
    delta_t: Optional[float] = None
    Q0: Optional[float] = None
    delta_q: Optional[float] = None
    m1: Optional[float] = None
    m2: Optional[float] = None
    q: Optional[float] = None
    omega: Optional[float] = None
    V: Optional[float] = None
    n_photons: Optional[int] = None
    output: Optional[str] = None
    format: Literal["csv", "json"] = "json"
    seed: int = 0

    def require(self, *keys: str) -> None:
        missing = [key for key in keys if getattr(self, key) is None]
        if missing:
            raise ConfigError(f"Scenario is missing required keys: {', '.join(missing)}")

    def in_planck_units(self) -> "ScenarioConfig":
        """Copy with every dimensioned value converted from SI to Planck units."""
        if self.unit_mode == "planck":
            return self
        converted = {
            key: to_planck(PhysicalQuantity(value, SCENARIO_DIMENSIONS[key])).value
            for key, value in self.model_dump().items()
            if key in SCENARIO_DIMENSIONS and value is not None
        }
        return self.model_copy(update={**converted, "unit_mode": "planck"})

    def interferometer_setup(self) -> InterferometerSetup:
        if self.m is None and self.E1 is not None:
            # c = 1: the excited rest energy is the inertial mass during flight
            logger.info("Scenario has no m; using E1 = %g as the interferometer mass", self.E1)
            mass = self.E1
        else:
            self.require("m")
            mass = self.m
        self.require("d", "D", "tau_a", "tau_f", "sigma")
        return InterferometerSetup(
            m=mass, d=self.d, D=self.D, tau_a=self.tau_a, tau_f=self.tau_f,
            sigma=self.sigma, delta_t=self.delta_t or 0.0,
        )

    def alice_quadrupole(self) -> AliceQuadrupole:
        self.require("Q0", "delta_q", "T")
        return AliceQuadrupole(Q0=self.Q0, delta_q=self.delta_q, T=self.T)

    def internal_energies(self) -> Optional[InternalEnergies]:
        if self.E0 is None and self.E1 is None:
            return None
        self.require("E0", "E1")
        return InternalEnergies(E0=self.E0, E1=self.E1)


class ScenarioLoader:
    """Reads scenario files into a validated ScenarioConfig."""

    def load(self, path: str | pathlib.Path) -> ScenarioConfig:
        return self.from_mapping(_read_mapping(pathlib.Path(path), "Scenario"))

    def from_mapping(self, data: Dict[str, Any]) -> ScenarioConfig:
        try:
            return ScenarioConfig.model_validate(data)
        except pydantic.ValidationError as exc:
            problems = "; ".join(f"{'.'.join(map(str, err['loc'])) or '<root>'}: {err['msg']}" for err in exc.errors())
            raise ConfigError(f"Invalid scenario: {problems}") from exc
