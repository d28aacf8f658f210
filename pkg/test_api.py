"""
Tests for the HTTP API.
"""
import pytest
from fastapi.testclient import TestClient
from sqlmodel import Session

from app.services import get_session, init_db
from app.services.database import make_engine
from main import app

CONFIG = {
    "dimension": 3,
    "polyhedron": {"preset": "cube"},
    "initial_data": {"preset": "flat", "params": {}, "margin_cells": 2},
    "resolutions": [4, 8],
    "suites": ["faces"],
}


@pytest.fixture
def client(tmp_path):
    engine = make_engine(f"sqlite:///{tmp_path / 'api.db'}")
    init_db(engine)

    def override_session():
        with Session(engine) as session:
            yield session

    app.dependency_overrides[get_session] = override_session
    yield TestClient(app)
    app.dependency_overrides.clear()


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    body = response.json()
    assert body["suites"][0] == "algebra"
    assert "hyperbolic_uhs" in body["field_presets"]
    assert "domain" in body["polyhedron_presets"]


def test_health(client):
    assert client.get("/health").json()["status"] == "healthy"


def test_check_names_and_explain(client):
    names = client.get("/checks/names").json()
    assert "tilt-dec" in names
    response = client.get("/checks/explain/tilt-dec")
    assert response.status_code == 200
    assert response.json()["name"] == "tilt-dec"
    assert client.get("/checks/explain/unknown").status_code == 404


def test_run_and_browse(client):
    """Test: POST /checks/run records the run; /runs lists, shows and deletes it"""
    response = client.post("/checks/run", json=CONFIG)
    assert response.status_code == 200
    body = response.json()
    assert body["report"]["passed"]
    assert body["report_path"] is None
    run_id = body["run_id"]

    runs = client.get("/runs").json()
    assert [r["id"] for r in runs] == [run_id]
    assert runs[0]["failed"] == []
    assert client.get("/runs", params={"passed": False}).json() == []

    detail = client.get(f"/runs/{run_id}").json()
    assert detail["config"]["dimension"] == 3
    assert len(detail["checks"]) == len(body["report"]["checks"])

    assert client.delete(f"/runs/{run_id}").status_code == 200
    assert client.get(f"/runs/{run_id}").status_code == 404
    assert client.delete(f"/runs/{run_id}").status_code == 404


def test_failed_run_is_recorded(client, tmp_path):
    config = dict(CONFIG, initial_data={"preset": "flat", "params": {"q_scale": -0.5}}, n0=[1, 0, 0],
                  output=str(tmp_path / "out"))
    body = client.post("/checks/run", json=config).json()
    assert not body["report"]["passed"]
    assert body["report_path"].endswith("report.txt")
    summary = client.get("/runs", params={"passed": False}).json()[0]
    assert summary["failed"] == ["tilt-dec"]


def test_invalid_config(client):
    assert client.post("/checks/run", json=dict(CONFIG, suites=["bogus"])).status_code == 422
    response = client.post("/checks/run", json=dict(CONFIG, polyhedron={"preset": "prism"}, dimension=2))
    assert response.status_code == 422
    assert "prism" in response.json()["detail"]
