"""Classification metrics: accuracy, confusion matrix, macro averages.

Macro precision/recall/F1 are unweighted means over all C classes; a
class with a zero denominator contributes 0 to the mean. The class axis
always has length num_classes even when some classes are absent from the
labels.
"""

from dataclasses import dataclass

import numpy as np

from .datasets import PredictionMatrix
from .errors import LengthMismatchError


def decide(pm: PredictionMatrix) -> np.ndarray:
    """Predicted class per row: argmax, lowest index on ties."""
    return np.argmax(pm.rows, axis=1)


def _checked_labels(pm: PredictionMatrix, labels) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1 or len(y) != pm.n:
        raise LengthMismatchError(
            f"{pm.n} prediction rows but {y.shape} labels"
        )
    if len(y) and (y.min() < 0 or y.max() >= pm.num_classes):
        raise ValueError("labels must lie in [0, num_classes)")
    return y


def accuracy(pm: PredictionMatrix, labels) -> float:
    y = _checked_labels(pm, labels)
    return float(np.count_nonzero(decide(pm) == y)) / pm.n


def confusion_matrix(pm: PredictionMatrix, labels) -> np.ndarray:
    """(C, C) int64 matrix, rows = true class, columns = predicted class."""
    y = _checked_labels(pm, labels)
    yhat = decide(pm)
    c = pm.num_classes
    m = np.zeros((c, c), dtype=np.int64)
    np.add.at(m, (y, yhat), 1)
    return m


@dataclass(frozen=True)
class ClassMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: tuple[ClassMetrics, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float

    @property
    def num_classes(self) -> int:
        return len(self.per_class)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": [
                {
                    "class": i,
                    "tp": c.tp,
                    "fp": c.fp,
                    "fn": c.fn,
                    # per-class accuracy is recall under one-label-per-row
                    "accuracy": c.recall,
                    "precision": c.precision,
                    "recall": c.recall,
                    "f1": c.f1,
                }
                for i, c in enumerate(self.per_class)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricsReport":
        per_class = tuple(
            ClassMetrics(
                tp=int(r["tp"]),
                fp=int(r["fp"]),
                fn=int(r["fn"]),
                precision=float(r["precision"]),
                recall=float(r["recall"]),
                f1=float(r["f1"]),
            )
            for r in sorted(doc["per_class"], key=lambda r: r["class"])
        )
        return cls(
            accuracy=float(doc["accuracy"]),
            per_class=per_class,
            macro_precision=float(doc["macro_precision"]),
            macro_recall=float(doc["macro_recall"]),
            macro_f1=float(doc["macro_f1"]),
        )


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def macro_metrics(pm: PredictionMatrix, labels) -> MetricsReport:
    """Full report from one confusion-matrix tally.

    report.accuracy equals trace(confusion) / N exactly, which matches
    accuracy() since both divide the same integers.
    """
    m = confusion_matrix(pm, labels)
    tp = np.diagonal(m)
    fp = m.sum(axis=0) - tp
    fn = m.sum(axis=1) - tp
    per_class = []
    for i in range(pm.num_classes):
        t, p, n = int(tp[i]), int(fp[i]), int(fn[i])
        per_class.append(
            ClassMetrics(
                tp=t,
                fp=p,
                fn=n,
                precision=_ratio(t, t + p),
                recall=_ratio(t, t + n),
                f1=_ratio(2 * t, 2 * t + p + n),
            )
        )
    c = pm.num_classes
    return MetricsReport(
        accuracy=int(tp.sum()) / pm.n,
        per_class=tuple(per_class),
        macro_precision=sum(x.precision for x in per_class) / c,
        macro_recall=sum(x.recall for x in per_class) / c,
        macro_f1=sum(x.f1 for x in per_class) / c,
    )


def select_best_checkpoint(reports: list[MetricsReport]) -> int:
    """Index of the best report: highest macro F1, then highest accuracy,
    then lowest index. Comparisons are exact float comparisons."""
    if not reports:
        raise ValueError("empty report list")
    return max(
        range(len(reports)),
        key=lambda i: (reports[i].macro_f1, reports[i].accuracy),
    )


def format_delta(baseline: float, current: float) -> str:
    """Signed percentage-point difference, two decimals, e.g. '+0.93'."""
    return f"{(current - baseline) * 100.0:+.2f}"
