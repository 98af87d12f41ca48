from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from tsrl.core.errors import RejectedInput
from tsrl.schemas.task_schema import LabeledDataset, TaskSplits


def dataset_header(input_dim: int) -> list[str]:
    return ["id", "label", "tag"] + [f"x{j}" for j in range(input_dim)]


def save_dataset(dataset: LabeledDataset, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(dataset_header(dataset.input_dim))
        for i in range(len(dataset)):
            tag = "" if dataset.tags is None else str(dataset.tags[i])
            writer.writerow([i, int(dataset.labels[i]), tag, *(repr(float(v)) for v in dataset.inputs[i])])
    return path


def load_dataset(path: Path) -> LabeledDataset:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except (OSError, UnicodeDecodeError) as e:
        raise RejectedInput(f"cannot read dataset {path}: {e}") from e

    if not rows:
        raise RejectedInput(f"{path}: empty file, header row required")
    header = rows[0]
    input_dim = len(header) - 3
    if input_dim < 1 or header != dataset_header(input_dim):
        raise RejectedInput(f"{path}: header must be 'id,label,tag,x0..x{{d-1}}', found {','.join(header)}")

    inputs, labels, tags = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise RejectedInput(f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
        try:
            label = int(row[1])
            inputs.append([float(v) for v in row[3:]])
        except ValueError as e:
            raise RejectedInput(f"{path}:{lineno}: {e}") from e
        if label not in (0, 1):
            raise RejectedInput(f"{path}:{lineno}: label must be 0 or 1, found {label}")
        labels.append(label)
        tags.append(row[2])

    has_tags = any(tags)
    return LabeledDataset(
        inputs=np.array(inputs, dtype=np.float64).reshape(len(inputs), input_dim),
        labels=np.array(labels, dtype=np.int64),
        tags=np.array(tags) if has_tags else None,
    )


def save_splits(splits: TaskSplits, directory: Path) -> None:
    directory = Path(directory)
    save_dataset(splits.train, directory / "train.csv")
    save_dataset(splits.test_in, directory / "test_in.csv")
    save_dataset(splits.test_shift, directory / "test_shift.csv")
