"""Checkpoint storage: named float64 tensor collections with exact JSON round-trips.

A checkpoint maps tensor names to C-contiguous float64 arrays, plus
string-to-string metadata. The on-disk form is UTF-8 JSON:

    {
      "format": "soupkit-ckpt-v1",
      "meta": {"key": "value", ...},
      "tensors": {
        "<name>": {"shape": [d1, ...], "data": [flat row-major floats]},
        ...
      }
    }

Floats are written with Python's repr (shortest decimal that round-trips),
so save followed by load reproduces every value bit for bit. Tensor names
are serialized in lexicographic order and meta keys sorted, making the
bytes a deterministic function of the contents.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from ._parallel import run_tasks
from .errors import (
    EmptyPoolError,
    LengthMismatchError,
    MalformedFileError,
    SchemaMismatchError,
)

FORMAT_NAME = "soupkit-ckpt-v1"


@dataclass(frozen=True)
class TensorSchema:
    """Names and shapes of a tensor collection, order-insensitive."""

    entries: tuple[tuple[str, tuple[int, ...]], ...]

    @classmethod
    def from_dict(cls, shapes: dict[str, tuple[int, ...]]) -> "TensorSchema":
        return cls(tuple(sorted((n, tuple(s)) for n, s in shapes.items())))

    def names(self) -> list[str]:
        return [n for n, _ in self.entries]

    def shape(self, name: str) -> tuple[int, ...]:
        for n, s in self.entries:
            if n == name:
                return s
        raise KeyError(name)

    def first_difference(self, other: "TensorSchema") -> str | None:
        """Lexicographically first name at which the schemas disagree, or None."""
        mine = dict(self.entries)
        theirs = dict(other.entries)
        for name in sorted(set(mine) | set(theirs)):
            if mine.get(name) != theirs.get(name):
                return name
        return None


def _as_tensor(name: str, value) -> np.ndarray:
    if not isinstance(name, str) or not name:
        raise ValueError("tensor names must be non-empty strings")
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        raise ValueError(f"tensor {name!r} is scalar; use shape (1,)")
    if arr.size == 0:
        raise ValueError(f"tensor {name!r} has a zero dimension")
    if not np.isfinite(arr).all():
        raise ValueError(f"tensor {name!r} contains non-finite values")
    return np.ascontiguousarray(arr)


@dataclass(eq=False)
class Checkpoint:
    """An in-memory checkpoint. Tensors are kept in lexicographic name order."""

    tensors: dict[str, np.ndarray]
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.tensors = {
            name: _as_tensor(name, arr)
            for name, arr in sorted(self.tensors.items())
        }
        for k, v in self.meta.items():
            if not isinstance(k, str) or not isinstance(v, str):
                raise ValueError("meta must map strings to strings")

    def names(self) -> list[str]:
        return list(self.tensors)

    def schema(self) -> TensorSchema:
        return TensorSchema.from_dict({n: a.shape for n, a in self.tensors.items()})

    def validate(self) -> None:
        """Re-check invariants (useful after external mutation of .tensors)."""
        self.__post_init__()

    def num_parameters(self) -> int:
        return sum(a.size for a in self.tensors.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Checkpoint):
            return NotImplemented
        return (
            self.meta == other.meta
            and self.names() == other.names()
            and all(
                a.shape == other.tensors[n].shape and bool((a == other.tensors[n]).all())
                for n, a in self.tensors.items()
            )
        )


def save_checkpoint(cp: Checkpoint, path: str | Path) -> None:
    """Write a checkpoint to path. I/O errors propagate as OSError."""
    cp.validate()
    payload = {
        "format": FORMAT_NAME,
        "meta": dict(sorted(cp.meta.items())),
        "tensors": {
            name: {"shape": list(arr.shape), "data": arr.reshape(-1).tolist()}
            for name, arr in cp.tensors.items()
        },
    }
    text = json.dumps(payload, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _require(cond: bool, path, why: str) -> None:
    if not cond:
        raise MalformedFileError(f"{path}: {why}")


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint. Malformed content raises MalformedFileError;
    missing or unreadable files propagate OSError."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: not valid JSON ({exc})") from exc
    _require(isinstance(doc, dict), path, "top level is not an object")
    _require(doc.get("format") == FORMAT_NAME, path, f"format field is not {FORMAT_NAME!r}")
    meta = doc.get("meta", {})
    _require(
        isinstance(meta, dict)
        and all(isinstance(k, str) and isinstance(v, str) for k, v in meta.items()),
        path,
        "meta must map strings to strings",
    )
    raw = doc.get("tensors")
    _require(isinstance(raw, dict), path, "missing tensors object")
    tensors: dict[str, np.ndarray] = {}
    for name, entry in raw.items():
        _require(isinstance(name, str) and bool(name), path, "empty tensor name")
        _require(isinstance(entry, dict), path, f"tensor {name!r} is not an object")
        shape = entry.get("shape")
        data = entry.get("data")
        _require(
            isinstance(shape, list)
            and len(shape) >= 1
            and all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in shape),
            path,
            f"tensor {name!r} shape must be a list of positive integers",
        )
        _require(isinstance(data, list), path, f"tensor {name!r} data must be a list")
        _require(
            all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in data),
            path,
            f"tensor {name!r} data must be numeric",
        )
        _require(
            all(math.isfinite(x) for x in data),
            path,
            f"tensor {name!r} data contains non-finite values",
        )
        expected = int(np.prod(shape))
        _require(
            len(data) == expected,
            path,
            f"tensor {name!r} has {len(data)} values, shape implies {expected}",
        )
        tensors[name] = np.array(data, dtype=np.float64).reshape(shape)
    try:
        return Checkpoint(tensors, dict(meta))
    except ValueError as exc:
        raise MalformedFileError(f"{path}: {exc}") from exc


def schema_check(cps: list[Checkpoint]) -> TensorSchema:
    """Shared schema of a checkpoint list.

    Raises EmptyPoolError for an empty list and SchemaMismatchError (naming
    the first offending tensor) when any two members disagree. The result
    does not depend on list order.
    """
    if not cps:
        raise EmptyPoolError("empty checkpoint list")
    ref = cps[0].schema()
    for cp in cps[1:]:
        bad = ref.first_difference(cp.schema())
        if bad is not None:
            raise SchemaMismatchError(bad)
    return ref


def _weights_are_uniform(weights: list[float]) -> bool:
    w0 = weights[0]
    return w0 == 1.0 / len(weights) and all(w == w0 for w in weights)


def linear_combine(cps: list[Checkpoint], weights: list[float]) -> Checkpoint:
    """Per-element weighted combination of checkpoints sharing one schema.

    General weights accumulate left to right: out = sum_k w_k * tensor_k,
    one rounded multiply-add per element per term. When every weight
    equals 1/len(cps) exactly, the combination is evaluated instead as an
    incremental mean (m += (x - m)/k), which is bit-deterministic too and
    additionally exact on identical inputs: averaging T copies of a
    checkpoint returns its values unchanged for every T. uniform_soup
    relies on that path.

    The output carries empty metadata. Result tensors must stay finite;
    overflow raises ValueError.
    """
    schema = schema_check(cps)
    if len(weights) != len(cps):
        raise LengthMismatchError(
            f"{len(cps)} checkpoints but {len(weights)} weights"
        )
    ws = [float(w) for w in weights]
    if not all(math.isfinite(w) for w in ws):
        raise ValueError("weights must be finite")
    uniform = _weights_are_uniform(ws)

    def combine_one(name: str) -> tuple[str, np.ndarray]:
        # overflow is detected by the finiteness check below, so the
        # numpy backend's RuntimeWarning for it is just noise
        with np.errstate(over="ignore", invalid="ignore"):
            if uniform:
                acc = cps[0].tensors[name].copy()
                flat = acc.reshape(-1)
                for k in range(2, len(cps) + 1):
                    _kernels.mean_update(flat, cps[k - 1].tensors[name].reshape(-1), float(k))
            else:
                acc = np.zeros(schema.shape(name))
                flat = acc.reshape(-1)
                for w, cp in zip(ws, cps):
                    _kernels.saxpy(flat, cp.tensors[name].reshape(-1), w)
        return name, acc

    out = dict(run_tasks(combine_one, schema.names()))
    try:
        return Checkpoint(out)
    except ValueError as exc:
        raise ValueError(f"combination produced non-finite values: {exc}") from exc
