"""CLI behavior: runs, exit codes, determinism, thin-client mode."""

import json

import pytest

from fedsim.cli import main
from fedsim.reporting import strip_timing

FAST = {
    "mode": "federated",
    "dataset": {"kind": "synthetic", "samples_per_class": 40, "dims": 3},
    "clients": 3,
    "rounds": 2,
    "epochs": 1,
    "centralized_epochs": 2,
    "seed": 5,
}


def write_config(tmp_path, overrides=None, name="cfg.json"):
    payload = {**FAST, **(overrides or {})}
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestRun:
    def test_successful_run_writes_artifacts(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "report.json").exists()
        assert (out / "metrics.csv").exists()
        assert (out / "confusion.csv").exists()
        assert (out / "roc_micro.csv").exists()
        assert not (out / "roc.svg").exists()
        assert "wrote" in capsys.readouterr().out

    def test_plot_flag_adds_svg(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--out", str(out), "--plot"]) == 0
        assert (out / "roc.svg").exists()

    def test_config_error_exits_one(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"fraction_fit": 2.0})
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
        assert "fraction_fit" in capsys.readouterr().err

    def test_missing_config_exits_one(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_runtime_error_exits_two(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"dataset": {"kind": "csv", "path": str(tmp_path / "no.csv")}})
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "error" in capsys.readouterr().err

    def test_failed_round_without_acceptance_exits_two(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"accept_failures": False, "failure_probability": 0.9, "seed": 0, "clients": 3},
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "failed" in capsys.readouterr().err

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", cfg, "--out", str(out_a)]) == 0
        assert main(["run", "--config", cfg, "--out", str(out_b)]) == 0
        report_a = strip_timing((out_a / "report.json").read_text())
        report_b = strip_timing((out_b / "report.json").read_text())
        assert report_a == report_b
        for name in ("metrics.csv", "confusion.csv", "roc_micro.csv", "roc_macro.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_seed_override_changes_results(self, tmp_path):
        cfg = write_config(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", cfg, "--out", str(out_a)]) == 0
        assert main(["run", "--config", cfg, "--out", str(out_b), "--seed", "99"]) == 0
        report_a = json.loads((out_a / "report.json").read_text())
        report_b = json.loads((out_b / "report.json").read_text())
        assert report_b["config"]["seed"] == 99
        assert report_a["results"] != report_b["results"]

    def test_both_mode_prints_summary(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"mode": "both"})
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "centralized" in stdout and "federated" in stdout
        assert (out / "summary.csv").exists()


class TestThinClient:
    @pytest.fixture
    def routed_to_service(self, monkeypatch):
        from fastapi.testclient import TestClient

        from fedsim.cli import httpx as cli_httpx
        from fedsim.service import app

        client = TestClient(app)
        monkeypatch.setattr(
            cli_httpx, "post", lambda url, json, timeout: client.post(url, json=json)
        )

    def test_remote_run_matches_local_run(self, tmp_path, routed_to_service):
        cfg = write_config(tmp_path)
        local, remote = tmp_path / "local", tmp_path / "remote"
        assert main(["run", "--config", cfg, "--out", str(local)]) == 0
        assert main(["run", "--config", cfg, "--out", str(remote), "--server", "http://testserver"]) == 0
        assert strip_timing((local / "report.json").read_text()) == strip_timing(
            (remote / "report.json").read_text()
        )
        for name in ("metrics.csv", "confusion.csv", "roc_micro.csv"):
            assert (local / name).read_bytes() == (remote / name).read_bytes()

    def test_remote_config_rejection_exits_one(self, tmp_path, routed_to_service, capsys):
        cfg = write_config(tmp_path, {"fraction_fit": 2.0})
        # skip local validation by sending a config the server must reject
        path = tmp_path / "raw.json"
        path.write_text(json.dumps({**FAST}))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--server", "http://testserver"]) == 1
