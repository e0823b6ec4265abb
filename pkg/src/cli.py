"""
cli.py

Command-line entry point: one subcommand per module, scenario files in,
deterministic CSV or JSON out.

    python -m src feasibility --scenario scenarios/two_level.toml
    python -m src sweep --scenario scenarios/rest_mass.toml --param m --range 0.01 1 100 --format csv
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import pathlib
import sys
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from src import feasibility, graviton, interferometry, quasiatom, radiative, trajectory
from src.audit_logger import AuditLogger
from src.config_loader import SCENARIO_DIMENSIONS, ConfigError, ConfigLoader, ScenarioConfig, ScenarioLoader
from src.errors import GravityChainError, NumericalError, ValidationError
from src.units import (
    DIMENSIONLESS,
    ENERGY,
    LENGTH,
    MASS,
    PLANCK,
    QUADRUPOLE,
    RATE,
    SPEED,
    TIME,
    Dimension,
    PhysicalQuantity,
    export_constants,
    from_planck,
    to_planck,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INVALID = 2

Rows = List[Dict[str, Any]]


class RunReport(BaseModel):
    """Envelope of every JSON document the CLI writes (see report.schema.json)."""

    command: str
    unit_mode: Literal["planck", "si"]
    result: Union[Dict[str, Any], List[Any]]


# ---------------------------------------------------------------------- #
# Subcommands
# ---------------------------------------------------------------------- #
def _plain(x: Any) -> Any:
    if isinstance(x, PhysicalQuantity):
        return x.value
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _output(value: Any, dim: Dimension, args: argparse.Namespace) -> Any:
    """Planck-unit result expressed in the run's unit mode."""
    value = _plain(value)
    if args.unit_mode != "si" or value is None or dim == DIMENSIONLESS or not math.isfinite(value):
        return value
    return from_planck(PhysicalQuantity(value, dim)).value


def cmd_trajectory(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    x0 = scenario.d or 1.0
    T = scenario.T or 1.0
    samples = args.samples or config["trajectory"]["samples"]
    sampled = trajectory.optimal_trajectory(x0, T, samples)
    delta_q = scenario.delta_q if scenario.delta_q is not None else 1.0
    rtol, atol = config["quadrature"]["rtol"], config["quadrature"]["atol"]
    summary = {
        "S": trajectory.s_functional(trajectory.OPTIMAL, rtol, quadrature_atol=atol),
        "E_min": _output(trajectory.min_radiated_energy(delta_q, T), ENERGY, args),
        "v_max": _output(trajectory.max_speed(x0, T), SPEED, args),
        "kappa": trajectory.kappa(),
    }
    if args.brute_force is not None:
        optimizer = config["optimizer"]
        seed = scenario.seed if "seed" in scenario.model_fields_set else optimizer["seed"]
        coefficients, best = trajectory.brute_force_minimize(
            args.brute_force, n_restarts=optimizer["restarts"], seed=seed, workers=config["sweep"]["workers"]
        )
        summary["brute_force"] = {"degree": args.brute_force, "S": best, "coefficients": coefficients.tolist()}
    rows = [
        {"t": _output(t, TIME, args), "x": _output(x, LENGTH, args), "v": _output(v, SPEED, args)}
        for t, x, v in zip(sampled.times, sampled.positions, sampled.velocities)
    ]
    return summary, rows


def cmd_visibility(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    setup = scenario.interferometer_setup()
    profile = interferometry.ForceProfile.canonical(setup.m, setup.d, setup.tau_a)
    path = interferometry.interferometer_path(interferometry.classical_path(profile, setup.m), setup.tau_f)
    samples = args.samples or config["trajectory"]["samples"]
    rows = []
    for t in np.linspace(0.0, path.duration, samples):
        overlap = interferometry.wavepacket_overlap(float(t), path, setup.m, setup.sigma)
        rows.append(
            {
                "t": _output(t, TIME, args),
                "A": interferometry.visibility(float(t), path, setup.m, setup.sigma),
                "Re_overlap": overlap.real,
                "Im_overlap": overlap.imag,
            }
        )
    summary = {
        "optimal_sigma": _output(interferometry.optimal_sigma(setup.m, setup.tau_a), LENGTH, args),
        "averaged_visibility": interferometry.averaged_visibility(
            setup.m, setup.d, setup.sigma, setup.tau_a, setup.delta_t
        ),
        "time_resolution_bound": _output(interferometry.time_resolution_bound(setup.m), TIME, args),
    }
    return summary, rows


def cmd_phases(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    setup = scenario.interferometer_setup()
    alice = scenario.alice_quadrupole()
    phases = interferometry.gravitational_phases(setup, alice)
    result = {key: _plain(value) for key, value in phases.as_dict().items()}
    return result, [result]


def _atom_params(scenario: ScenarioConfig) -> quasiatom.QuasiatomParams:
    if scenario.m1 is None and scenario.m2 is None and scenario.q is None:
        return quasiatom.QuasiatomParams.hydrogen(PLANCK)
    scenario.require("m1", "m2", "q")
    return quasiatom.QuasiatomParams(scenario.m1, scenario.m2, scenario.q, PLANCK)


_ATOM_DIMENSIONS = {"M": MASS, "mu": MASS, "E_R": ENERGY, "a0": LENGTH, "E0": ENERGY, "E1": ENERGY}


def cmd_atom(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    summary = _atom_params(scenario).summary()
    for key, dim in _ATOM_DIMENSIONS.items():
        summary[key] = _output(summary[key], dim, args)
    return summary, [summary]


def cmd_rates(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    params = _atom_params(scenario)
    omega = 0.75 * params.E_R / PLANCK.hbar
    dipole = quasiatom.DIPOLE_COEFF * params.a0
    gamma_spo = radiative.spontaneous_rate_total(omega, dipole, params.q)
    rates = radiative.stimulated_rates(gamma_spo, scenario.n_photons or 0, scenario.omega, omega if scenario.omega else None)
    result: Dict[str, Any] = {
        "gamma_spo": _output(gamma_spo, RATE, args),
        "gamma_emi": _output(rates.gamma_emission, RATE, args),
        "gamma_abs": _output(rates.gamma_absorption, RATE, args),
        "einstein_a": _output(radiative.einstein_a(omega, dipole, params.q), RATE, args),
        "lifetime": _output(rates.lifetime, TIME, args),
        "stable": None,
    }
    if scenario.tau_a is not None and scenario.tau_f is not None:
        window = radiative.stability_window(scenario.interferometer_setup(), rates)
        result.update(stable=window.passed, lifetime_margin=window.lifetime_margin, absorption_margin=window.absorption_margin)
    return result, [result]


def cmd_graviton(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    rows = []
    for l_i in range(4):
        for l_f in range(4):
            verdict = graviton.selection_rule(l_i, l_f)
            rows.append({"l_i": l_i, "l_f": l_f, "allowed": verdict.allowed})
    plus = graviton.GWPolarization.along_z("+")
    s, p0, d2 = quasiatom.OrbitalLabel(1, 0, 0), quasiatom.OrbitalLabel(2, 1, 0), quasiatom.OrbitalLabel(3, 2, 2)
    result: Dict[str, Any] = {
        "selection": rows,
        "matrix_elements": {
            "1s|e+|2p0": abs(graviton.quadrupole_matrix_element(s, p0, plus, method="analytic")),
            "1s|e+|3d+2": abs(graviton.quadrupole_matrix_element(s, d2, plus, method="analytic")),
        },
    }
    if scenario.omega is not None and scenario.V is not None:
        result["strain"] = _plain(graviton.strain_amplitude(scenario.omega, scenario.V))
    return result, rows


def _constraint_dimensions(energies: bool) -> Dict[str, Dimension]:
    budget = ENERGY if energies else MASS
    return {
        "alice_causal": LENGTH,
        "bob_causal": LENGTH,
        "graviton_emission": QUADRUPOLE,
        "phase_distinguishability": budget,
        "time_resolution": budget,
        "geometry": LENGTH,
    }


def cmd_feasibility(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    internal = scenario.internal_energies()
    report = feasibility.check_ftl_chain(scenario.interferometer_setup(), scenario.alice_quadrupole(), internal)
    result = report.as_dict()
    dims = _constraint_dimensions(internal is not None)
    for row in result["constraints"]:
        row["lhs"] = _output(row["lhs"], dims[row["name"]], args)
        row["rhs"] = _output(row["rhs"], dims[row["name"]], args)
    approximations = result["approximations"]
    approximations["displacement"] = _output(approximations["displacement"], LENGTH, args)
    return result, result["constraints"]


def cmd_constants(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    if args.codata:
        export_constants(args.codata)
    table = [row.as_dict() for row in feasibility.derive_constants()]
    rows = [{key: row[key] for key in ("name", "derived", "printed", "rel_err")} for row in table]
    return {"constants": table}, rows


def _sweep_values(args: argparse.Namespace) -> List[float]:
    if not args.param or not args.range:
        raise ConfigError("sweep needs --param NAME and --range START STOP NUM")
    start, stop, num = args.range
    if int(num) < 1:
        raise ConfigError("sweep range is empty")
    return sorted(np.linspace(float(start), float(stop), int(num)).tolist())


def cmd_sweep(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    values = _sweep_values(args)
    setup, alice, internal = scenario.interferometer_setup(), scenario.alice_quadrupole(), scenario.internal_energies()
    workers = config["sweep"]["workers"]
    if args.param == "d_over_D":
        rows = feasibility.sweep(setup, alice, "d", [v * setup.D for v in values], internal, workers)
        for row, ratio in zip(rows, values):
            row["d_over_D"] = ratio
            del row["d"]
    else:
        dim = SCENARIO_DIMENSIONS.get(args.param, DIMENSIONLESS)
        planck_values = values
        if args.unit_mode == "si" and dim != DIMENSIONLESS:
            planck_values = [to_planck(PhysicalQuantity(v, dim)).value for v in values]
        try:
            rows = feasibility.sweep(setup, alice, args.param, planck_values, internal, workers)
        except KeyError as exc:
            raise ConfigError(f"Unknown sweep parameter {args.param!r}") from exc
        # report the grid in the units it was given in
        for row, value in zip(rows, values):
            row[args.param] = value
    columns = [args.param, "verdict", *feasibility.CONSTRAINT_ORDER]
    rows = [{key: row[key] for key in columns} for row in rows]
    return {"parameter": args.param, "rows": rows}, rows


def cmd_selftest(scenario: ScenarioConfig, args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[Dict[str, Any], Rows]:
    from src import selftest

    rows = [outcome.as_dict() for outcome in selftest.run_all(seed=args.seed)]
    failed = [row["name"] for row in rows if not row["passed"]]
    return {"checks": rows, "failed": failed}, rows


COMMANDS: Dict[str, Tuple[Callable, str]] = {
    "trajectory": (cmd_trajectory, "Optimal closing trajectory samples and radiation summary"),
    "visibility": (cmd_visibility, "Visibility and branch overlap along the interferometer path"),
    "phases": (cmd_phases, "Gravitational branch phases"),
    "atom": (cmd_atom, "Quasiatom spectrum and Bohr radius"),
    "rates": (cmd_rates, "Photon emission and absorption rates"),
    "graviton": (cmd_graviton, "Graviton selection rules and matrix elements"),
    "feasibility": (cmd_feasibility, "Evaluate the signaling constraint chain"),
    "constants": (cmd_constants, "Recompute the rounded constants"),
    "sweep": (cmd_sweep, "Feasibility over a parameter grid"),
    "selftest": (cmd_selftest, "Run the oracle suite"),
}


# ---------------------------------------------------------------------- #
# Plumbing
# ---------------------------------------------------------------------- #
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="Scenario file (JSON, TOML or YAML)")
    common.add_argument("--config", default="config.yml", help="Run configuration (default: config.yml)")
    common.add_argument("--unit-mode", choices=("planck", "si"), help="Unit system of scenario values and outputs")
    common.add_argument("--out", help="Output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="Output format")
    common.add_argument("--seed", type=int, help="Seed for randomized oracles")
    common.add_argument("--samples", type=int, help="Number of time samples")
    common.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    parser = argparse.ArgumentParser(prog="gravity-chain", description=__doc__.splitlines()[3])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "constants":
            p.add_argument("--codata", metavar="PATH", help="Also export the CODATA constants as JSON")
        if name == "trajectory":
            p.add_argument(
                "--brute-force", type=int, metavar="DEGREE", help="Also run the seeded restart search over √(polynomial) shapes"
            )
        if name == "sweep":
            p.add_argument("--param", help="Scenario key to vary (or d_over_D)")
            p.add_argument("--range", nargs=3, metavar=("START", "STOP", "NUM"), type=float)
    return parser


def _load_config(path: str) -> Dict[str, Any]:
    loader = ConfigLoader()
    if pathlib.Path(path).is_file():
        return loader.load_config(path)
    return loader.default_config()


def _render(command: str, unit_mode: str, result: Dict[str, Any], rows: Rows, fmt: str) -> str:
    if fmt == "csv":
        buffer = io.StringIO()
        header = list(rows[0]) if rows else []
        writer = csv.DictWriter(buffer, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()
    report = RunReport(command=command, unit_mode=unit_mode, result=result)
    return json.dumps(report.model_dump(), sort_keys=True, indent=2, default=_plain) + "\n"


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    value = _plain(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    audit: Optional[AuditLogger] = None
    scenario_data: Dict[str, Any] = {}
    try:
        config = _load_config(args.config)
        logging.basicConfig(
            level=args.log_level or config["logging"]["level"],
            format="[%(module)-12s] %(levelname)s %(message)s",
        )
        audit = AuditLogger(config["audit"]["path"], config["audit"]["enabled"])
        loader = ScenarioLoader()
        scenario = loader.load(args.scenario) if args.scenario else ScenarioConfig()
        overrides: Dict[str, Any] = {}
        if args.unit_mode:
            overrides["unit_mode"] = args.unit_mode
        if args.seed is not None:
            overrides["seed"] = args.seed
        scenario = scenario.model_copy(update=overrides)
        args.unit_mode = scenario.unit_mode
        args.seed = scenario.seed
        scenario_data = scenario.model_dump()
        fmt = args.format or scenario.format
        out = args.out or scenario.output

        handler, _ = COMMANDS[args.command]
        result, rows = handler(scenario.in_planck_units(), args, config)
        text = _render(args.command, scenario.unit_mode, _jsonable(result), _jsonable(rows), fmt)
        if out:
            pathlib.Path(out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        if args.command == "selftest" and result["failed"]:
            raise NumericalError(f"Self-test failures: {', '.join(result['failed'])}")
        summary = {"verdict": result["verdict"]} if "verdict" in result else {"rows": len(rows)}
        audit.log_run(args.command, scenario_data, summary, "OK")
        return EXIT_OK
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if audit:
            audit.log_run(args.command, scenario_data, {"error": str(exc)}, "INVALID")
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if audit:
            audit.log_run(args.command, scenario_data, {"error": str(exc)}, "FAILED")
        return EXIT_NUMERICAL
    except GravityChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
