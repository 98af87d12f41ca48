"""Run directory layout and artifact files.

    <out>/<mode>-seed<seed>/
        metrics.csv          one EpochRow per epoch
        summary.json         RunSummary
        student.net          TSRL-NET v1 checkpoints
        actor.net, critic.net, log_std.txt
        registry/epoch_XXX.csv   with dump_registry
        train.csv, test_in.csv, test_shift.csv   with --dump-data
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from tsrl.schemas.run_schema import EpochRow, RunSummary

FAILED_MARKER = "FAILED"
REGISTRY_COLUMNS = ["sample_id", "ema_loss", "forget_count", "epochs_observed", "last_correct"]


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def run_directory(out_root: Path, run_name: str) -> Path:
    return Path(out_root) / run_name


def write_metrics(rows: Sequence[EpochRow], path: Path) -> Path:
    columns = EpochRow.columns()
    return write_csv(path, columns, ([getattr(row, c) for c in columns] for row in rows))


def read_metrics(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def write_summary(summary: RunSummary, path: Path) -> Path:
    return write_json(path, summary.model_dump(mode="json"))


def write_registry(records, path: Path) -> Path:
    return write_csv(
        path,
        REGISTRY_COLUMNS,
        ([r.sample_id, r.ema_loss, r.forget_count, r.epochs_observed, r.last_correct] for r in records),
    )


def mark_failed(directory: Path, reason: str) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    marker = directory / FAILED_MARKER
    marker.write_text(reason.rstrip() + "\n", encoding="utf-8")
    return marker
