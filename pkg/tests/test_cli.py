import csv
import io
import json
import pathlib

import pytest

from src import cli, selftest, trajectory
from src.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, RunReport

SCENARIOS = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def run(tmp_path, capsys):
    config = tmp_path / "config.yml"
    config.write_text(f"audit:\n  path: {tmp_path / 'audit.log'}\n", encoding="utf-8")

    def invoke(*argv):
        code = cli.main([*argv, "--config", str(config)])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


def _audit(tmp_path):
    return [json.loads(line) for line in (tmp_path / "audit.log").read_text(encoding="utf-8").splitlines()]


def test_feasibility_json(run, tmp_path):
    code, out, _ = run("feasibility", "--scenario", str(SCENARIOS / "two_level.toml"))
    assert code == EXIT_OK
    report = RunReport.model_validate_json(out)
    assert report.command == "feasibility"
    assert report.unit_mode == "planck"
    assert report.result["verdict"] == "paradox_possible"
    assert _audit(tmp_path)[-1]["summary"] == {"verdict": "paradox_possible"}


def test_feasibility_is_deterministic(run):
    first = run("feasibility", "--scenario", str(SCENARIOS / "rest_mass.toml"))
    second = run("feasibility", "--scenario", str(SCENARIOS / "rest_mass.toml"))
    assert first[:2] == second[:2]
    assert json.loads(first[1])["result"]["blocking_constraints"] == ["phase_distinguishability"]


def test_trajectory_csv(run, tmp_path):
    out_file = tmp_path / "trajectory.csv"
    code, out, _ = run("trajectory", "--format", "csv", "--samples", "5", "--out", str(out_file))
    assert code == EXIT_OK and out == ""
    rows = list(csv.DictReader(io.StringIO(out_file.read_text(encoding="utf-8"))))
    assert len(rows) == 5
    assert float(rows[0]["x"]) == pytest.approx(1.0)
    assert float(rows[-1]["x"]) == pytest.approx(0.0, abs=1e-12)


def test_constants_csv_and_codata_export(run, tmp_path):
    codata = tmp_path / "constants.json"
    code, out, _ = run("constants", "--format", "csv", "--codata", str(codata))
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["name", "derived", "printed", "rel_err"]
    assert "d_over_D" in {row["name"] for row in rows}
    assert json.loads(codata.read_text(encoding="utf-8"))["c"] == 299792458.0


def test_sweep_csv(run):
    code, out, _ = run(
        "sweep", "--scenario", str(SCENARIOS / "rest_mass.toml"),
        "--param", "m", "--range", "0.1", "0.2", "11", "--format", "csv",
    )
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0])[:3] == ["m", "verdict", "alice_causal"]
    assert len(rows) == 11
    assert rows[0]["time_resolution"] == "True"
    assert rows[-1]["time_resolution"] == "False"


def test_sweep_over_separation_ratio(run):
    code, out, _ = run(
        "sweep", "--scenario", str(SCENARIOS / "rest_mass.toml"),
        "--param", "d_over_D", "--range", "0.1", "1.0", "4",
    )
    assert code == EXIT_OK
    rows = json.loads(out)["result"]["rows"]
    assert [row["d_over_D"] for row in rows] == pytest.approx([0.1, 0.4, 0.7, 1.0])
    assert all("d" not in row for row in rows)


@pytest.mark.parametrize(
    "extra, message",
    [
        (("--param", "m", "--range", "0.1", "0.2", "0"), "empty"),
        (("--param", "colour", "--range", "0.1", "0.2", "3"), "colour"),
        ((), "--param"),
    ],
)
def test_sweep_rejects_bad_arguments(run, tmp_path, extra, message):
    code, out, err = run("sweep", "--scenario", str(SCENARIOS / "rest_mass.toml"), *extra)
    assert code == EXIT_INVALID
    assert out == ""
    assert message in err
    assert _audit(tmp_path)[-1]["status"] == "INVALID"


def test_missing_scenario_file(run, tmp_path):
    code, _, err = run("feasibility", "--scenario", str(tmp_path / "absent.toml"))
    assert code == EXIT_INVALID
    assert "not found" in err


def test_incomplete_scenario(run, tmp_path):
    scenario = tmp_path / "partial.json"
    scenario.write_text('{"m": 0.1}', encoding="utf-8")
    code, _, err = run("feasibility", "--scenario", str(scenario))
    assert code == EXIT_INVALID
    assert "missing required keys" in err


def test_invalid_config(tmp_path, capsys):
    config = tmp_path / "config.yml"
    config.write_text("units:\n  mode: cgs\n", encoding="utf-8")
    assert cli.main(["constants", "--config", str(config)]) == EXIT_INVALID
    assert "units.mode" in capsys.readouterr().err


def test_atom_in_si_units(run):
    code, out, _ = run("atom", "--scenario", str(SCENARIOS / "hydrogen.yml"))
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["unit_mode"] == "si"
    assert report["result"]["E_R"] / 1.602176634e-19 == pytest.approx(13.598, rel=1e-3)


def test_rates_without_flight_times(run):
    code, out, _ = run("rates")
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    assert result["stable"] is None
    assert result["gamma_emi"] == pytest.approx(result["gamma_spo"])


def test_phases_and_graviton(run):
    code, out, _ = run("phases", "--scenario", str(SCENARIOS / "rest_mass.toml"))
    assert code == EXIT_OK
    phases = json.loads(out)["result"]
    assert phases["Gamma"] == pytest.approx(phases["gamma"])

    code, out, _ = run("graviton")
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    assert result["matrix_elements"]["1s|e+|2p0"] == pytest.approx(0.0, abs=1e-12)
    assert len(result["selection"]) == 16


def test_shipped_schema_matches_report_model():
    shipped = json.loads((SCENARIOS.parent / "report.schema.json").read_text(encoding="utf-8"))
    generated = RunReport.model_json_schema()
    assert shipped["required"] == generated["required"]
    assert set(shipped["properties"]) == set(generated["properties"])
    assert shipped["properties"]["unit_mode"]["enum"] == ["planck", "si"]


def test_rates_in_si_units(run):
    code, out, _ = run("rates", "--scenario", str(SCENARIOS / "hydrogen.yml"))
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    assert result["einstein_a"] == pytest.approx(6.27e8, rel=1e-2)
    assert result["lifetime"] == pytest.approx(1.0 / result["gamma_emi"])


def test_trajectory_in_si_units(run, tmp_path):
    scenario = tmp_path / "si.json"
    scenario.write_text('{"unit_mode": "si", "d": 2.0, "T": 4.0}', encoding="utf-8")
    code, out, _ = run("trajectory", "--scenario", str(scenario), "--samples", "3")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["unit_mode"] == "si"
    assert report["result"]["v_max"] == pytest.approx(trajectory.speed_ratio() * 2.0 / 4.0, rel=1e-9)
    assert report["result"]["S"] == pytest.approx(80.0, rel=1e-7)


def test_feasibility_in_si_units(run):
    code, out, _ = run("feasibility", "--scenario", str(SCENARIOS / "rest_mass.toml"), "--unit-mode", "si")
    assert code == EXIT_OK
    constraints = {row["name"]: row for row in json.loads(out)["result"]["constraints"]}
    assert constraints["geometry"]["lhs"] == pytest.approx(50.0, rel=1e-9)
    assert constraints["geometry"]["rhs"] == pytest.approx(100.0, rel=1e-9)
    assert constraints["alice_causal"]["lhs"] == pytest.approx(299792458.0 * 50.0, rel=1e-9)
    assert constraints["graviton_emission"]["lhs"] == pytest.approx(1.0, rel=1e-9)
    assert constraints["phase_distinguishability"]["lhs"] == pytest.approx(0.1, rel=1e-9)


def test_sweep_grid_stays_in_si_units(run):
    code, out, _ = run(
        "sweep", "--scenario", str(SCENARIOS / "rest_mass.toml"), "--unit-mode", "si",
        "--param", "d", "--range", "10", "50", "3",
    )
    assert code == EXIT_OK
    rows = json.loads(out)["result"]["rows"]
    assert [row["d"] for row in rows] == pytest.approx([10.0, 30.0, 50.0])
    assert all(row["geometry"] for row in rows)


def test_trajectory_brute_force_uses_optimizer_config(tmp_path, capsys):
    config = tmp_path / "config.yml"
    config.write_text(
        f"audit:\n  path: {tmp_path / 'audit.log'}\n"
        "optimizer:\n  restarts: 8\n  seed: 0\n"
        "quadrature:\n  rtol: 1.0e-10\n  atol: 1.0e-12\n",
        encoding="utf-8",
    )
    code = cli.main(["trajectory", "--samples", "3", "--brute-force", "5", "--config", str(config)])
    assert code == EXIT_OK
    result = json.loads(capsys.readouterr().out)["result"]
    assert result["S"] == pytest.approx(80.0, rel=1e-7)
    assert result["brute_force"]["degree"] == 5
    assert result["brute_force"]["S"] == pytest.approx(80.0, abs=1e-4)


def test_selftest_failure_still_writes_rows(run, tmp_path, monkeypatch):
    monkeypatch.setattr(
        selftest,
        "CHECKS",
        [("always_passes", lambda rng: (True, "ok")), ("always_fails", lambda rng: (False, "1 vs 2"))],
    )
    code, out, err = run("selftest", "--format", "csv")
    assert code == EXIT_NUMERICAL
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [row["name"] for row in rows] == ["always_passes", "always_fails"]
    assert [row["passed"] for row in rows] == ["True", "False"]
    assert "always_fails" in err
    assert _audit(tmp_path)[-1]["status"] == "FAILED"
