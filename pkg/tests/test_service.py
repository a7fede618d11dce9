"""HTTP service endpoints."""

import pytest
from fastapi.testclient import TestClient

from fedsim import __version__
from fedsim.config import ExperimentConfig, parse_config
from fedsim.reporting import strip_timing, render_report_json
from fedsim.runner import run_experiment
from fedsim.service import create_app

FAST = {
    "mode": "federated",
    "dataset": {"kind": "synthetic", "samples_per_class": 40, "dims": 3},
    "clients": 3,
    "rounds": 2,
    "epochs": 1,
    "seed": 5,
}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestHealth:
    def test_ok(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "version": __version__}


class TestDefaults:
    def test_matches_config_model(self, client):
        response = client.get("/config/defaults")
        assert response.status_code == 200
        assert parse_config(response.json()) == ExperimentConfig()


class TestRunEndpoint:
    def test_runs_experiment(self, client):
        response = client.post("/experiments", json=FAST)
        assert response.status_code == 200
        body = response.json()
        assert set(body) == {"config", "results", "timing"}
        assert body["config"]["seed"] == 5
        assert len(body["results"]["federated"]["rounds"]) == 2

    def test_matches_local_run(self, client):
        response = client.post("/experiments", json=FAST)
        remote = strip_timing(render_report_json(response.json()))
        local = strip_timing(render_report_json(run_experiment(parse_config(FAST))))
        assert remote == local

    def test_unknown_key_rejected(self, client):
        response = client.post("/experiments", json={**FAST, "bogus": 1})
        assert response.status_code == 422

    def test_out_of_range_rejected(self, client):
        response = client.post("/experiments", json={**FAST, "fraction_fit": 2.0})
        assert response.status_code == 422
        assert "fraction_fit" in response.text

    def test_runtime_failure_maps_to_500(self, client):
        payload = {**FAST, "dataset": {"kind": "csv", "path": "/does/not/exist.csv"}}
        response = client.post("/experiments", json=payload)
        assert response.status_code == 500
        assert "cannot read" in response.json()["detail"]

    def test_round_failure_maps_to_500(self, client):
        payload = {
            **FAST,
            "accept_failures": False,
            "failure_probability": 0.9,
            "seed": 0,
        }
        response = client.post("/experiments", json=payload)
        assert response.status_code == 500
        assert "failed" in response.json()["detail"]
