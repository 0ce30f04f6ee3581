"""Synthetic training-run fixtures.

A random teacher network labels Gaussian feature vectors; snapshots are
the teacher plus per-epoch Gaussian weight noise of varying magnitude,
each scored on a validation split. That yields pools whose candidates
genuinely differ in quality, which is what the greedy scan needs.
"""

from dataclasses import dataclass

import numpy as np

from .datasets import LabeledDataset
from .metrics import macro_metrics
from .mlp import MlpSpec, forward, forward_logits, random_checkpoint
from .soup import Snapshot
from .tensor_store import Checkpoint


def make_dataset(
    teacher: Checkpoint, spec: MlpSpec, rng: np.random.Generator, n: int
) -> LabeledDataset:
    """n Gaussian rows labeled by the teacher's argmax logit."""
    x = rng.normal(0.0, 1.0, size=(n, spec.num_features))
    labels = np.argmax(forward_logits(teacher, spec, x), axis=1)
    return LabeledDataset(x, labels, spec.num_classes)


def perturbed(
    base: Checkpoint, rng: np.random.Generator, scale: float
) -> Checkpoint:
    tensors = {
        name: arr + rng.normal(0.0, scale, size=arr.shape)
        for name, arr in base.tensors.items()
    }
    return Checkpoint(tensors)


def log_loss(pm, labels) -> float:
    """Mean negative log-probability of the true class."""
    picked = pm.rows[np.arange(pm.n), np.asarray(labels, dtype=np.int64)]
    return float(-np.mean(np.log(np.clip(picked, 1e-12, 1.0))))


def make_snapshots(
    teacher: Checkpoint,
    spec: MlpSpec,
    val: LabeledDataset,
    rng: np.random.Generator,
    count: int,
    noise_lo: float = 0.05,
    noise_hi: float = 0.8,
) -> list[Snapshot]:
    """count perturbed snapshots scored on val; epoch ids are 0..count-1."""
    snaps = []
    for epoch in range(count):
        scale = float(rng.uniform(noise_lo, noise_hi))
        cp = perturbed(teacher, rng, scale)
        preds = forward(cp, spec, val)
        report = macro_metrics(preds, val.labels)
        snaps.append(
            Snapshot(
                epoch=epoch,
                checkpoint=cp,
                loss=log_loss(preds, val.labels),
                accuracy=report.accuracy,
                f1=report.macro_f1,
            )
        )
    return snaps


@dataclass(eq=False)
class SynthRun:
    spec: MlpSpec
    teacher: Checkpoint
    snapshots: list[Snapshot]
    val: LabeledDataset
    test: LabeledDataset


def synth_run(
    seed: int,
    num_features: int = 4,
    num_classes: int = 3,
    hidden: tuple[int, ...] = (6,),
    snapshots: int = 8,
    n_val: int = 60,
    n_test: int = 60,
) -> SynthRun:
    """Deterministic full fixture for a given seed."""
    rng = np.random.default_rng(seed)
    spec = MlpSpec((num_features, *hidden, num_classes))
    teacher = random_checkpoint(spec, rng)
    val = make_dataset(teacher, spec, rng, n_val)
    test = make_dataset(teacher, spec, rng, n_test)
    snaps = make_snapshots(teacher, spec, val, rng, snapshots)
    return SynthRun(spec=spec, teacher=teacher, snapshots=snaps, val=val, test=test)
