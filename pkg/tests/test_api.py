import json
import warnings

import pytest
from fastapi import status
from fastapi.testclient import TestClient

from app.core.errors import CycleError
from app.dependencies.profiles import domain_error
from app.integrations.storage import fixture_path
from app.main import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_help(client):
    response = client.get("/help")

    assert response.status_code == 200
    assert "/plans" in response.json()["routes"]


def test_list_fixtures(client):
    response = client.get("/profiles/fixtures")
    tipos = {f["name"]: f["kind"] for f in response.json()}

    assert response.status_code == 200
    assert tipos["gelan-t"] == "profile"
    assert tipos["gelan-t-9"] == tipos["gelan-t-transposed-9"] == "profile"
    assert tipos["deployment-gelan-t"] == "deployment"


def test_validate_fixture(client):
    response = client.post("/profiles/validate", json={"fixture": "gelan-t"})

    assert response.status_code == 200
    assert response.json()["summary"] == "23 layers, 15 sub-exits"


def test_validate_inline_cycle_is_422(client):
    profile = json.loads(fixture_path("greedy-trap").read_text(encoding="utf-8"))
    profile["layers"][0]["deps"] = [3]

    response = client.post("/profiles/validate", json={"profile": profile})

    assert response.status_code == 422
    assert "Ciclo" in response.json()["detail"]


def test_domain_error_status_is_not_deprecated():
    with warnings.catch_warnings():
        warnings.simplefilter("error", DeprecationWarning)
        error = domain_error(CycleError([0, 1]))

    assert error.status_code == status.HTTP_422_UNPROCESSABLE_CONTENT == 422


def test_profile_or_fixture_required(client):
    assert client.post("/profiles/validate", json={}).status_code == 400
    assert client.post("/profiles/validate", json={"fixture": "no-existe"}).status_code == 404


def test_optimize(client):
    response = client.post("/plans/optimize", json={"fixture": "greedy-trap"})

    assert response.status_code == 200
    assert response.json()["order"] == [0, 1, 2, 3]
    assert response.json()["q_unnormalized"] == pytest.approx(119.8)


def test_optimize_node_limit_is_422(client):
    response = client.post("/plans/optimize", json={"fixture": "gelan-t-transposed", "node_limit": 10})
    assert response.status_code == 422


def test_greedy_and_select_exits(client):
    perf = client.post("/plans/greedy", json={"fixture": "greedy-trap", "method": "perf"})
    seleccion = client.post("/plans/select-exits", json={"fixture": "greedy-trap", "k": 2})

    assert perf.json()["q_unnormalized"] == pytest.approx(32.0)
    assert seleccion.json()["exit_labels"] == ["(0,4,2)", "(0,1,2)"]
    assert client.post("/plans/select-exits", json={"fixture": "greedy-trap", "k": 99}).status_code == 422


def test_simulation_run_is_deterministic(client):
    body = {"fixture": "greedy-trap", "method": "greedy_time", "trials": 2000, "seed": 9}
    primera = client.post("/simulation/run", json=body)
    segunda = client.post("/simulation/run", json=body)

    assert primera.status_code == 200
    assert primera.json() == segunda.json()
    assert sum(b["frequency"] for b in primera.json()["quality_histogram"]) == 2000


def test_simulation_bad_rate_is_422(client):
    body = {"fixture": "greedy-trap", "interrupt": {"kind": "exponential", "rate": -1.0}}
    assert client.post("/simulation/run", json=body).status_code == 422


def test_calibrate(client):
    deployment = json.loads(fixture_path("deployment-gelan-t").read_text(encoding="utf-8"))
    response = client.post("/simulation/calibrate", json=deployment)

    assert response.status_code == 200
    assert response.json()["backends"]["tensorrt"]["per_chunk_overhead_ms"] == pytest.approx(0.109, abs=5e-4)
