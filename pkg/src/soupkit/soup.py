"""Candidate pools and soup construction.

A training run hands over snapshots (epoch id, checkpoint, validation
loss/accuracy/F1). build_candidate_pool keeps the top-k snapshots per
retention metric and dedups by epoch. uniform_soup averages the whole
pool; greedy_soup starts from the best single candidate and admits each
further candidate only if the running average's validation accuracy does
not drop.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field

from .datasets import LabeledDataset
from .errors import EmptyPoolError, EvaluatorFailure
from .tensor_store import Checkpoint, linear_combine, schema_check

RETENTION_METRICS = ("loss", "accuracy", "f1")

Evaluator = Callable[[Checkpoint, LabeledDataset], float]


@dataclass(eq=False)
class Snapshot:
    """One saved training state with its validation statistics."""

    epoch: int
    checkpoint: Checkpoint
    loss: float
    accuracy: float
    f1: float

    def __post_init__(self):
        self.epoch = int(self.epoch)
        for name in ("loss", "accuracy", "f1"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"snapshot {name} must be finite")
            setattr(self, name, v)


@dataclass(eq=False)
class CandidatePool:
    """Checkpoints selected for souping, ordered by ascending epoch id.

    source_tags[i] records which retention metrics kept epoch_ids[i],
    joined by "+" in the fixed order loss, accuracy, f1.
    """

    checkpoints: list[Checkpoint]
    epoch_ids: list[int]
    source_tags: list[str]

    def __post_init__(self):
        if not (len(self.checkpoints) == len(self.epoch_ids) == len(self.source_tags)):
            raise ValueError("pool fields must be parallel lists")
        if len(set(self.epoch_ids)) != len(self.epoch_ids):
            raise ValueError("epoch ids must be unique")
        schema_check(self.checkpoints)  # also rejects an empty pool

    @property
    def size(self) -> int:
        return len(self.checkpoints)


def build_candidate_pool(snapshots: list[Snapshot], k: int) -> CandidatePool:
    """Union of the top-k snapshots per metric, deduplicated by epoch.

    "Top" means lowest loss, highest accuracy, highest F1; ties inside a
    metric resolve toward the lower epoch. Pool size is at most 3k.
    """
    if not snapshots:
        raise EmptyPoolError("empty snapshot list")
    if int(k) < 1:
        raise ValueError("k must be >= 1")
    if len({s.epoch for s in snapshots}) != len(snapshots):
        raise ValueError("duplicate epoch ids in snapshot list")
    schema_check([s.checkpoint for s in snapshots])
    rank_keys = {
        "loss": lambda s: (s.loss, s.epoch),
        "accuracy": lambda s: (-s.accuracy, s.epoch),
        "f1": lambda s: (-s.f1, s.epoch),
    }
    kept: dict[int, list[str]] = {}
    for metric in RETENTION_METRICS:
        for s in sorted(snapshots, key=rank_keys[metric])[: int(k)]:
            kept.setdefault(s.epoch, []).append(metric)
    by_epoch = {s.epoch: s for s in snapshots}
    epochs = sorted(kept)
    return CandidatePool(
        checkpoints=[by_epoch[e].checkpoint for e in epochs],
        epoch_ids=epochs,
        source_tags=["+".join(kept[e]) for e in epochs],
    )


def uniform_soup(pool: CandidatePool) -> Checkpoint:
    """Equal-weight average over every pool candidate."""
    t = pool.size
    return linear_combine(pool.checkpoints, [1.0 / t] * t)


@dataclass(frozen=True)
class TraceEntry:
    """One greedy-scan step: the accuracy tried for a candidate and the verdict."""

    candidate: int
    accuracy: float
    accepted: bool


@dataclass(eq=True)
class SoupSelection:
    """Greedy outcome: selected pool indices in acceptance order, full trace."""

    selected: list[int] = field(default_factory=list)
    trace: list[TraceEntry] = field(default_factory=list)


def _checked_eval(evaluator: Evaluator, cp: Checkpoint, val: LabeledDataset) -> float:
    value = float(evaluator(cp, val))
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise EvaluatorFailure(f"evaluator returned {value!r}, expected [0, 1]")
    return value


def greedy_soup(
    pool: CandidatePool,
    evaluator: Evaluator,
    val: LabeledDataset,
    order: str = "index",
) -> tuple[SoupSelection, Checkpoint]:
    """Greedy selection over the pool, then the average of the survivors.

    Starts from the argmax single-candidate validation accuracy (lowest
    index on ties), scans the remaining candidates, and accepts one when
    the accuracy of avg(selected + candidate) is >= the current soup's
    accuracy (non-strict, so exact ties are admitted). The current soup
    accuracy is the cached value from the last acceptance, not recomputed.

    order="index" scans in pool order; order="sorted" scans by descending
    single-candidate accuracy (index on ties). The trace lists every
    candidate in scan order; the initial best appears with its solo
    accuracy and accepted=True.

    The returned checkpoint dominates: its validation accuracy is >= the
    best single candidate's, exactly, because the initial value can only
    be replaced by a non-smaller one.
    """
    if order not in ("index", "sorted"):
        raise ValueError(f"order must be 'index' or 'sorted', got {order!r}")
    solo = [_checked_eval(evaluator, cp, val) for cp in pool.checkpoints]
    best = max(range(pool.size), key=solo.__getitem__)  # first max: lowest index
    if order == "index":
        scan = list(range(pool.size))
    else:
        scan = sorted(range(pool.size), key=lambda i: (-solo[i], i))
    selected = [best]
    current = solo[best]
    trace = [TraceEntry(best, solo[best], True)]
    for cand in scan:
        if cand == best:
            continue
        trial = linear_combine(
            [pool.checkpoints[i] for i in [*selected, cand]],
            [1.0 / (len(selected) + 1)] * (len(selected) + 1),
        )
        acc = _checked_eval(evaluator, trial, val)
        accepted = acc >= current
        trace.append(TraceEntry(cand, acc, accepted))
        if accepted:
            selected.append(cand)
            current = acc
    soup = linear_combine(
        [pool.checkpoints[i] for i in selected],
        [1.0 / len(selected)] * len(selected),
    )
    return SoupSelection(selected=selected, trace=trace), soup


REPORT_FORMAT_VERSION = 1


def soup_report(sel: SoupSelection, pool: CandidatePool) -> dict:
    """JSON-ready summary: one row per scanned candidate, plus the selection."""
    for idx in sel.selected:
        if not 0 <= idx < pool.size:
            raise IndexError(f"selected index {idx} outside pool of {pool.size}")
    for entry in sel.trace:
        if not 0 <= entry.candidate < pool.size:
            raise IndexError(f"trace index {entry.candidate} outside pool of {pool.size}")
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "pool_size": pool.size,
        "selected": list(sel.selected),
        "final_size": len(sel.selected),
        "candidates": [
            {
                "index": e.candidate,
                "epoch": pool.epoch_ids[e.candidate],
                "source_tag": pool.source_tags[e.candidate],
                "accuracy": e.accuracy,
                "accepted": e.accepted,
            }
            for e in sel.trace
        ],
    }


def parse_soup_report(doc: dict) -> SoupSelection:
    """Inverse of soup_report (pool metadata is not reconstructed)."""
    return SoupSelection(
        selected=[int(i) for i in doc["selected"]],
        trace=[
            TraceEntry(int(r["index"]), float(r["accuracy"]), bool(r["accepted"]))
            for r in doc["candidates"]
        ],
    )
