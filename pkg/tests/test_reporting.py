"""Report bundles, CSV/JSON writers, and the SVG renderer."""

import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from fedsim.config import parse_config
from fedsim.plots import render_roc_svg
from fedsim.reporting import (
    render_report_json,
    strip_timing,
    summary_table,
    write_outputs,
)
from fedsim.runner import run_experiment

FAST = {
    "dataset": {"kind": "synthetic", "samples_per_class": 40, "dims": 3},
    "clients": 3,
    "rounds": 2,
    "epochs": 1,
    "centralized_epochs": 2,
    "seed": 5,
}


@pytest.fixture(scope="module")
def both_bundle():
    return run_experiment(parse_config({**FAST, "mode": "both"}))


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestBundle:
    def test_sections(self, both_bundle):
        assert set(both_bundle) == {"config", "results", "timing"}
        assert set(both_bundle["results"]) == {"centralized", "federated"}
        assert set(both_bundle["timing"]) == {"centralized_seconds", "federated_seconds"}

    def test_config_echo_round_trips(self, both_bundle):
        echoed = parse_config(both_bundle["config"])
        assert echoed == parse_config({**FAST, "mode": "both"})

    def test_json_is_strict_and_lossless(self, both_bundle):
        text = render_report_json(both_bundle)
        parsed = json.loads(text)  # no NaN/Infinity tokens
        assert render_report_json(parsed) == text

    def test_results_deterministic_across_runs(self):
        a = run_experiment(parse_config({**FAST, "mode": "both"}))
        b = run_experiment(parse_config({**FAST, "mode": "both"}))
        assert strip_timing(render_report_json(a)) == strip_timing(render_report_json(b))

    def test_strip_timing_removes_only_timing(self, both_bundle):
        stripped = strip_timing(render_report_json(both_bundle))
        assert "timing" not in stripped
        assert set(stripped) == {"config", "results"}


class TestWriteOutputs:
    def test_file_set(self, both_bundle, tmp_path):
        written = write_outputs(both_bundle, str(tmp_path), plot=True)
        names = sorted(p.rsplit("/", 1)[-1] for p in written)
        assert names == [
            "confusion.csv",
            "metrics.csv",
            "report.json",
            "roc.svg",
            "roc_class_0.csv",
            "roc_class_1.csv",
            "roc_macro.csv",
            "roc_micro.csv",
            "roc_worst_case.csv",
            "summary.csv",
        ]

    def test_metrics_csv_round_trips_exactly(self, both_bundle, tmp_path):
        write_outputs(both_bundle, str(tmp_path))
        header, rows = read_csv(tmp_path / "metrics.csv")
        assert header == ["round", "train_loss", "train_acc", "test_loss", "test_acc"]
        records = both_bundle["results"]["federated"]["rounds"]
        assert len(rows) == len(records)
        for row, rec in zip(rows, records):
            assert int(row[0]) == rec["round"]
            for cell, key in zip(row[1:], ("train_loss", "train_accuracy", "test_loss", "test_accuracy")):
                if rec[key] is None:
                    assert cell == ""
                else:
                    assert float(cell) == rec[key]

    def test_roc_csv_round_trips_exactly(self, both_bundle, tmp_path):
        write_outputs(both_bundle, str(tmp_path))
        header, rows = read_csv(tmp_path / "roc_micro.csv")
        assert header == ["fpr", "tpr"]
        points = both_bundle["results"]["federated"]["final"]["roc"]
        micro = next(c for c in points if c["kind"] == "micro")
        assert len(rows) == len(micro["points"])
        for row, (fpr, tpr) in zip(rows, micro["points"]):
            assert float(row[0]) == fpr and float(row[1]) == tpr

    def test_confusion_csv_matches(self, both_bundle, tmp_path):
        write_outputs(both_bundle, str(tmp_path))
        header, rows = read_csv(tmp_path / "confusion.csv")
        confusion = both_bundle["results"]["federated"]["final"]["confusion"]
        assert header == ["true_class", "pred_0", "pred_1"]
        for c, row in enumerate(rows):
            assert int(row[0]) == c
            assert [int(v) for v in row[1:]] == confusion[c]

    def test_single_mode_writes_no_summary(self, tmp_path):
        bundle = run_experiment(parse_config({**FAST, "mode": "centralized"}))
        written = write_outputs(bundle, str(tmp_path))
        assert not any(p.endswith("summary.csv") for p in written)

    def test_summary_has_both_rows(self, both_bundle, tmp_path):
        write_outputs(both_bundle, str(tmp_path))
        header, rows = read_csv(tmp_path / "summary.csv")
        assert header == ["experiment", "train_acc", "test_acc", "train_loss", "test_loss", "time_sec"]
        assert [r[0] for r in rows] == ["centralized", "federated"]
        for row in rows:
            for cell in row[1:]:
                assert cell == "" or math.isfinite(float(cell))

    def test_summary_table_text(self, both_bundle):
        table = summary_table(both_bundle)
        assert "centralized" in table and "federated" in table


class TestSvg:
    def test_worst_case_only(self):
        curves = [{"kind": "worst_case", "auc": 0.5, "points": [[0.0, 0.0], [1.0, 1.0]]}]
        svg = render_roc_svg(curves)
        assert svg.startswith("<svg")
        assert "area = 0.50" in svg
        assert svg.count("<polyline") == 1
        ET.fromstring(svg)  # well-formed XML

    def test_pair_counting_example_legend(self):
        # AUC 0.75 curve from the binary ROC example
        points = [[0.0, 0.0], [0.0, 0.5], [0.5, 0.5], [0.5, 1.0], [1.0, 1.0]]
        svg = render_roc_svg([{"kind": "class_1", "auc": 0.75, "points": points}])
        assert "area = 0.75" in svg
        ET.fromstring(svg)

    def test_full_family_renders(self, both_bundle):
        curves = both_bundle["results"]["federated"]["final"]["roc"]
        svg = render_roc_svg(curves)
        assert svg.count("<polyline") == len(curves)
        ET.fromstring(svg)

    def test_deterministic_bytes(self, both_bundle):
        curves = both_bundle["results"]["federated"]["final"]["roc"]
        assert render_roc_svg(curves) == render_roc_svg(json.loads(json.dumps(curves)))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            render_roc_svg([])
