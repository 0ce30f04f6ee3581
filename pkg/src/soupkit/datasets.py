"""Labeled datasets and prediction matrices, plus their CSV formats.

Dataset CSV: header "f1,...,fF,label", one row per instance, float
features and an integer class label in [0, C). Prediction CSV: header
"p0,...,p{C-1}", one probability row per instance. Floats are written
with repr so files round-trip exactly; rows use "\n" line endings.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedFileError, NotOnSimplexError

ROW_SUM_TOL = 1e-9


@dataclass(eq=False)
class LabeledDataset:
    """Features (N, F) float64 with int labels (N,) in [0, num_classes)."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be 2-D")
        if self.labels.ndim != 1 or len(self.labels) != len(self.features):
            raise ValueError("labels must be 1-D with one entry per row")
        if self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise ValueError("dataset must have at least one row and one feature")
        if not np.isfinite(self.features).all():
            raise ValueError("features must be finite")
        if int(self.num_classes) < 1:
            raise ValueError("num_classes must be >= 1")
        self.num_classes = int(self.num_classes)
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise ValueError("labels must lie in [0, num_classes)")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


@dataclass(eq=False)
class PredictionMatrix:
    """(N, C) class-probability rows; every row on the probability simplex."""

    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2 or self.rows.shape[0] < 1 or self.rows.shape[1] < 1:
            raise ValueError("prediction matrix must be 2-D and non-empty")
        if not np.isfinite(self.rows).all():
            raise NotOnSimplexError("probabilities must be finite")
        if (self.rows < 0.0).any() or (self.rows > 1.0).any():
            raise NotOnSimplexError("probabilities must lie in [0, 1]")
        sums = self.rows.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise NotOnSimplexError(
                f"row {i} sums to {sums[i]!r}, expected 1 within {ROW_SUM_TOL}"
            )

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def num_classes(self) -> int:
        return self.rows.shape[1]


def _read_rows(path: str | Path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if len(rows) < 2:
        raise MalformedFileError(f"{path}: need a header and at least one data row")
    return rows


def _write_rows(path: str | Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def _parse_float(path, cell: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise MalformedFileError(f"{path}: {cell!r} is not a number") from None
    if not np.isfinite(value):
        raise MalformedFileError(f"{path}: non-finite value {cell!r}")
    return value


def load_dataset_csv(path: str | Path, num_classes: int | None = None) -> LabeledDataset:
    """Read a dataset CSV. num_classes defaults to max(label) + 1."""
    rows = _read_rows(path)
    header = rows[0]
    nf = len(header) - 1
    if nf < 1 or header != [f"f{i}" for i in range(1, nf + 1)] + ["label"]:
        raise MalformedFileError(f"{path}: header must be f1,...,f{max(nf, 1)},label")
    feats = []
    labels = []
    for row in rows[1:]:
        if len(row) != nf + 1:
            raise MalformedFileError(f"{path}: row has {len(row)} cells, expected {nf + 1}")
        feats.append([_parse_float(path, c) for c in row[:-1]])
        try:
            labels.append(int(row[-1]))
        except ValueError:
            raise MalformedFileError(f"{path}: label {row[-1]!r} is not an integer") from None
    c = num_classes if num_classes is not None else max(labels) + 1
    try:
        return LabeledDataset(np.array(feats), np.array(labels), c)
    except ValueError as exc:
        raise MalformedFileError(f"{path}: {exc}") from exc


def save_dataset_csv(ds: LabeledDataset, path: str | Path) -> None:
    header = [f"f{i}" for i in range(1, ds.num_features + 1)] + ["label"]
    body = (
        [repr(float(v)) for v in row] + [str(int(lab))]
        for row, lab in zip(ds.features, ds.labels)
    )
    _write_rows(path, [header, *body])


def load_predictions_csv(path: str | Path) -> PredictionMatrix:
    """Read a prediction CSV; simplex violations raise NotOnSimplexError."""
    rows = _read_rows(path)
    header = rows[0]
    nc = len(header)
    if header != [f"p{j}" for j in range(nc)]:
        raise MalformedFileError(f"{path}: header must be p0,...,p{{C-1}}")
    data = []
    for row in rows[1:]:
        if len(row) != nc:
            raise MalformedFileError(f"{path}: row has {len(row)} cells, expected {nc}")
        data.append([_parse_float(path, c) for c in row])
    return PredictionMatrix(np.array(data))


def save_predictions_csv(pm: PredictionMatrix, path: str | Path) -> None:
    header = [f"p{j}" for j in range(pm.num_classes)]
    body = ([repr(float(v)) for v in row] for row in pm.rows)
    _write_rows(path, [header, *body])
