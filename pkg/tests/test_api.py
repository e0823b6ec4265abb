import importlib
import json

import pytest
from fastapi.testclient import TestClient

TWO_LEVEL = {
    "E0": 0.1, "E1": 1.0, "d": 100.0, "D": 100.0, "tau_a": 10.0, "tau_f": 20.0,
    "sigma": 1.0, "delta_t": 0.5, "Q0": 1.0, "delta_q": 1.0, "T": 50.0,
}


@pytest.fixture
def api(tmp_path, monkeypatch):
    config = tmp_path / "config.yml"
    config.write_text(f"audit:\n  path: {tmp_path / 'audit.log'}\n", encoding="utf-8")
    monkeypatch.setenv("GRAVITY_CHAIN_CONFIG", str(config))
    import src.main

    module = importlib.reload(src.main)
    return TestClient(module.app), tmp_path / "audit.log"


def test_health(api):
    client, _ = api
    response = client.get("/")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "unit_mode": "planck"}


def test_feasibility(api):
    client, audit = api
    response = client.post("/feasibility", json=TWO_LEVEL)
    assert response.status_code == 200
    body = response.json()
    assert body["verdict"] == "paradox_possible"
    assert len(body["constraints"]) == 6
    entry = json.loads(audit.read_text(encoding="utf-8").splitlines()[-1])
    assert entry["command"] == "POST /feasibility" and entry["status"] == "OK"


def test_feasibility_missing_keys(api):
    client, audit = api
    response = client.post("/feasibility", json={"m": 0.1})
    assert response.status_code == 422
    assert "missing required keys" in response.json()["detail"]
    assert json.loads(audit.read_text(encoding="utf-8").splitlines()[-1])["status"] == "INVALID"


def test_feasibility_bad_values(api):
    client, _ = api
    assert client.post("/feasibility", json={**TWO_LEVEL, "tau_a": -1.0}).status_code == 422
    assert client.post("/feasibility", json={**TWO_LEVEL, "colour": "blue"}).status_code == 422


def test_constants(api):
    client, _ = api
    rows = client.get("/constants").json()["constants"]
    assert {"v_max_ratio", "kappa", "d_over_D"} <= {row["name"] for row in rows}


def test_trajectory(api):
    client, _ = api
    body = client.get("/trajectory", params={"samples": 5}).json()
    assert body["S"] == pytest.approx(80.0, rel=1e-7)
    assert body["tau"] == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert body["xi"][0] == pytest.approx(1.0) and body["xi"][-1] == pytest.approx(0.0, abs=1e-12)
    assert client.get("/trajectory", params={"samples": 1}).status_code == 422
