"""Reference multilayer perceptron over stored checkpoints.

Layer i (0-based) reads tensors "layer{i}.weight" with shape [out, in]
and "layer{i}.bias" with shape [out]. Hidden layers apply ReLU; the final
layer's outputs are logits, turned into probabilities by a row-wise
max-subtracted softmax.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .datasets import LabeledDataset, PredictionMatrix
from .errors import DimensionMismatchError, MalformedFileError, SchemaMismatchError
from .tensor_store import Checkpoint, TensorSchema


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths, input first: (F, h1, ..., C)."""

    layer_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError("layer_sizes needs >= 2 entries, all positive")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def num_features(self) -> int:
        return self.layer_sizes[0]

    @property
    def num_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes) - 1

    def schema(self) -> TensorSchema:
        shapes: dict[str, tuple[int, ...]] = {}
        for i in range(self.num_layers):
            fan_in, fan_out = self.layer_sizes[i], self.layer_sizes[i + 1]
            shapes[f"layer{i}.weight"] = (fan_out, fan_in)
            shapes[f"layer{i}.bias"] = (fan_out,)
        return TensorSchema.from_dict(shapes)

    @classmethod
    def from_file(cls, path: str | Path) -> "MlpSpec":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise MalformedFileError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(doc, dict) or "layer_sizes" not in doc:
            raise MalformedFileError(f"{path}: expected an object with layer_sizes")
        try:
            return cls(tuple(doc["layer_sizes"]))
        except (TypeError, ValueError) as exc:
            raise MalformedFileError(f"{path}: {exc}") from exc

    def save(self, path: str | Path) -> None:
        text = json.dumps({"layer_sizes": list(self.layer_sizes)})
        Path(path).write_text(text + "\n", encoding="utf-8")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with the row max subtracted first (overflow-safe)."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward_logits(cp: Checkpoint, spec: MlpSpec, features: np.ndarray) -> np.ndarray:
    """Logit matrix (N, C) for a feature matrix (N, F).

    The checkpoint must match spec.schema() exactly; the feature width
    must equal spec.num_features.
    """
    bad = cp.schema().first_difference(spec.schema())
    if bad is not None:
        raise SchemaMismatchError(bad, "checkpoint does not fit the model spec")
    x = np.ascontiguousarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatchError("features must be 2-D")
    if x.shape[1] != spec.num_features:
        raise DimensionMismatchError(
            f"features have {x.shape[1]} columns, model expects {spec.num_features}"
        )
    if not np.isfinite(x).all():
        raise ValueError("features must be finite")
    for i in range(spec.num_layers):
        w = cp.tensors[f"layer{i}.weight"]
        b = cp.tensors[f"layer{i}.bias"]
        out = np.empty((x.shape[0], w.shape[0]))
        _kernels.affine(x, w, b, out)
        x = np.maximum(out, 0.0) if i < spec.num_layers - 1 else out
    return x


def forward(cp: Checkpoint, spec: MlpSpec, ds: LabeledDataset) -> PredictionMatrix:
    """softmax(logits) over a dataset's features."""
    if ds.num_classes != spec.num_classes:
        raise DimensionMismatchError(
            f"dataset has {ds.num_classes} classes, model predicts {spec.num_classes}"
        )
    return PredictionMatrix(softmax(forward_logits(cp, spec, ds.features)))


def random_checkpoint(spec: MlpSpec, rng: np.random.Generator, scale: float = 1.0) -> Checkpoint:
    """Gaussian-initialized checkpoint matching spec.schema()."""
    tensors = {}
    for name, shape in spec.schema().entries:
        tensors[name] = rng.normal(0.0, scale, size=shape)
    return Checkpoint(tensors)


class MlpEvaluator:
    """Callable (checkpoint, dataset) -> validation accuracy in [0, 1]."""

    def __init__(self, spec: MlpSpec):
        self.spec = spec

    def __call__(self, cp: Checkpoint, ds: LabeledDataset) -> float:
        from .metrics import accuracy

        return accuracy(forward(cp, self.spec, ds), ds.labels)
