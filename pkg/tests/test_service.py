import pytest
from fastapi.testclient import TestClient

from v2vzones import __version__
from v2vzones.config import SimConfig
from v2vzones.service import app
from v2vzones.sweep import run_sweep


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    body = client.get("/health").json()
    assert body == {"status": "ok", "version": __version__}


def test_defaults_match_config_model(client):
    body = client.get("/config/defaults").json()
    assert body == SimConfig().model_dump()


def test_simulate_runs_both_schemes(client):
    resp = client.post("/simulate", json={
        "config": {"vue_pairs": 4, "rbs": 6, "horizon_s": 20, "seed": 2}})
    assert resp.status_code == 200
    rows = resp.json()["rows"]
    assert [r["scheme"] for r in rows] == ["proposed", "baseline"]
    assert all(0.0 <= r["satisfaction_pct"] <= 100.0 for r in rows)
    assert rows[0]["vue_pairs"] == 4 and rows[0]["seed"] == 2


def test_sweep_matches_local_execution(client):
    payload = {"config": {"horizon_s": 20}, "vue_pairs": [4], "rbs": [6],
               "seeds": [1, 2]}
    resp = client.post("/sweep", json=payload)
    assert resp.status_code == 200
    body = resp.json()
    local = run_sweep(SimConfig(horizon_s=20), [4], [6], [1, 2])
    assert body["files"] == local.files
    assert len(body["rows"]) == len(local.rows)


def test_invalid_config_rejected(client):
    resp = client.post("/simulate", json={"config": {"beta": 0.5}})
    assert resp.status_code == 422
    assert "beta must exceed alpha" in str(resp.json())
    resp = client.post("/simulate", json={"config": {"bogus_key": 1}})
    assert resp.status_code == 422
