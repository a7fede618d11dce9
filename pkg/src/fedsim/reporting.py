"""Report assembly and deterministic file output.

A finished experiment becomes a JSON-ready bundle:

    {"config": ..., "results": {...}, "timing": {...}}

Everything under "results" is byte-deterministic for a fixed (config,
seed); wall-clock measurements live only under "timing".  CSV floats are
written with 17 significant digits so they parse back to the exact
float64 values.
"""

from __future__ import annotations

import json
import math
import os
from typing import Any

from .config import ExperimentConfig
from .federation import ExperimentResult, RoundReport
from .plots import render_roc_svg

CSV_FLOAT_DIGITS = ".17g"


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(value, CSV_FLOAT_DIGITS)


def _float_or_none(value: float) -> float | None:
    value = float(value)
    return None if math.isnan(value) else value


def _round_to_dict(report: RoundReport) -> dict[str, Any]:
    if report.client_metrics:
        total = sum(cm.sample_count for cm in report.client_metrics)
        train_loss = sum(cm.train_loss * cm.sample_count for cm in report.client_metrics) / total
        train_accuracy = (
            sum(cm.train_accuracy * cm.sample_count for cm in report.client_metrics) / total
        )
    else:
        train_loss = None
        train_accuracy = None
    out: dict[str, Any] = {
        "round": report.round_index,
        "rule": report.rule,
        "sampled": list(report.sampled_ids),
        "participants": list(report.participant_ids),
        "failed": list(report.failed_ids),
        "skipped": report.skipped,
        "clients": [
            {
                "id": cm.client_id,
                "train_loss": float(cm.train_loss),
                "train_accuracy": float(cm.train_accuracy),
                "samples": cm.sample_count,
            }
            for cm in report.client_metrics
        ],
        "train_loss": None if train_loss is None else float(train_loss),
        "train_accuracy": None if train_accuracy is None else float(train_accuracy),
        "test_loss": float(report.test_loss),
        "test_accuracy": float(report.test_accuracy),
    }
    if report.client_eval is not None:
        out["client_eval"] = [
            {"id": cid, "test_loss": float(loss), "test_accuracy": float(acc)}
            for cid, loss, acc in report.client_eval
        ]
    return out


def result_to_dict(result: ExperimentResult) -> dict[str, Any]:
    """Deterministic (wall-time-free) JSON form of one experiment result."""
    return {
        "mode": result.mode,
        "flagged_client": 0,
        "rounds": [_round_to_dict(r) for r in result.rounds],
        "final": {
            "train_loss": _float_or_none(result.final_train_loss),
            "train_accuracy": _float_or_none(result.final_train_accuracy),
            "test_loss": float(result.final_test_loss),
            "test_accuracy": float(result.final_test_accuracy),
            "confusion": [[int(v) for v in row] for row in result.confusion.counts],
            "roc": [
                {
                    "kind": curve.kind,
                    "auc": float(curve.auc),
                    "points": [[float(x), float(y)] for x, y in curve.points],
                }
                for curve in result.curves
            ],
        },
    }


def build_bundle(
    config: ExperimentConfig, results: dict[str, ExperimentResult]
) -> dict[str, Any]:
    """Combine the config echo and all results; timing goes in its own section."""
    return {
        "config": config.model_dump(mode="json"),
        "results": {name: result_to_dict(res) for name, res in results.items()},
        "timing": {
            f"{name}_seconds": round(res.wall_time_seconds, 2)
            for name, res in results.items()
        },
    }


def render_report_json(bundle: dict[str, Any]) -> str:
    return json.dumps(bundle, indent=2) + "\n"


def strip_timing(report_json: str) -> dict[str, Any]:
    """Parse report.json and drop the non-deterministic timing section."""
    data = json.loads(report_json)
    data.pop("timing", None)
    return data


def _artifact_result(bundle: dict[str, Any]) -> dict[str, Any]:
    # CSV/SVG artifacts describe the federated run when both were executed
    results = bundle["results"]
    return results.get("federated") or results["centralized"]


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _metrics_csv(result: dict[str, Any]) -> str:
    lines = ["round,train_loss,train_acc,test_loss,test_acc"]
    for rec in result["rounds"]:
        lines.append(
            ",".join(
                [
                    str(rec["round"]),
                    _fmt(rec["train_loss"]),
                    _fmt(rec["train_accuracy"]),
                    _fmt(rec["test_loss"]),
                    _fmt(rec["test_accuracy"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _confusion_csv(result: dict[str, Any]) -> str:
    confusion = result["final"]["confusion"]
    class_count = len(confusion)
    header = "true_class," + ",".join(f"pred_{c}" for c in range(class_count))
    lines = [header]
    for c, row in enumerate(confusion):
        lines.append(f"{c}," + ",".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def _roc_csv(curve: dict[str, Any]) -> str:
    lines = ["fpr,tpr"]
    for x, y in curve["points"]:
        lines.append(f"{_fmt(float(x))},{_fmt(float(y))}")
    return "\n".join(lines) + "\n"


def _summary_rows(bundle: dict[str, Any]) -> list[dict[str, Any]]:
    rows = []
    for name in ("centralized", "federated"):
        result = bundle["results"].get(name)
        if result is None:
            continue
        final = result["final"]
        rows.append(
            {
                "experiment": name,
                "train_acc": final["train_accuracy"],
                "test_acc": final["test_accuracy"],
                "train_loss": final["train_loss"],
                "test_loss": final["test_loss"],
                "time_sec": bundle["timing"].get(f"{name}_seconds"),
            }
        )
    return rows


def _summary_csv(bundle: dict[str, Any]) -> str:
    lines = ["experiment,train_acc,test_acc,train_loss,test_loss,time_sec"]
    for row in _summary_rows(bundle):
        time_cell = "" if row["time_sec"] is None else f"{row['time_sec']:.2f}"
        lines.append(
            ",".join(
                [
                    row["experiment"],
                    _fmt(row["train_acc"]),
                    _fmt(row["test_acc"]),
                    _fmt(row["train_loss"]),
                    _fmt(row["test_loss"]),
                    time_cell,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def summary_table(bundle: dict[str, Any]) -> str:
    """Human-readable side-by-side comparison for stdout."""
    columns = ["experiment", "train_acc", "test_acc", "train_loss", "test_loss", "time_sec"]
    rows = [columns]
    for row in _summary_rows(bundle):
        cells = [row["experiment"]]
        for key in columns[1:-1]:
            value = row[key]
            cells.append("n/a" if value is None else f"{value:.4f}")
        cells.append("n/a" if row["time_sec"] is None else f"{row['time_sec']:.2f}")
        rows.append(cells)
    widths = [max(len(r[i]) for r in rows) for i in range(len(columns))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    return "\n".join(lines)


def write_outputs(bundle: dict[str, Any], out_dir: str, plot: bool = False) -> list[str]:
    """Write report.json plus the CSV (and optional SVG) artifacts.

    Returns the list of paths written.  Apart from report.json's timing
    section and summary.csv's time column, every byte is a pure function
    of (config, seed).
    """
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def emit(name: str, text: str) -> None:
        path = os.path.join(out_dir, name)
        _write(path, text)
        written.append(path)

    emit("report.json", render_report_json(bundle))
    result = _artifact_result(bundle)
    emit("metrics.csv", _metrics_csv(result))
    emit("confusion.csv", _confusion_csv(result))
    for curve in result["final"]["roc"]:
        emit(f"roc_{curve['kind']}.csv", _roc_csv(curve))
    if len(bundle["results"]) > 1:
        emit("summary.csv", _summary_csv(bundle))
    if plot:
        emit("roc.svg", render_roc_svg(result["final"]["roc"]))
    return written
