"""Output-space ensemble analysis.

Soft voting (probability averaging), pairwise symmetric cross-entropy
distances between models, a Torgerson (classical MDS) embedding of the
distance matrix, and Kruskal stress-1 as the embedding quality score.

The symmetric cross-entropy self-distance is twice the mean entropy, not
zero, so the matrix is not a metric; the diagonal is zeroed before MDS
and the raw diagonal is kept for diagnostics.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from ._parallel import run_tasks
from .datasets import PredictionMatrix, ROW_SUM_TOL
from .errors import (
    AsymmetricInputError,
    DegenerateDistancesError,
    DimensionTooLargeError,
    LengthMismatchError,
    MalformedFileError,
    NotOnSimplexError,
    ShapeMismatchError,
    TooFewModelsError,
)

LOG_EPS = 1e-12
SYMMETRY_TOL = 1e-12
SIGN_EPS = 1e-9
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def soft_vote(preds: list[PredictionMatrix]) -> PredictionMatrix:
    """Per-cell mean of the member probabilities.

    Each cell is accumulated with math.fsum, so the result is the
    correctly rounded mean and reordering the model list cannot change a
    single bit.
    """
    if not preds:
        raise ValueError("empty prediction list")
    shape = preds[0].rows.shape
    for pm in preds[1:]:
        if pm.rows.shape != shape:
            raise ShapeMismatchError(
                f"prediction shapes differ: {shape} vs {pm.rows.shape}"
            )
    if len(preds) == 1:
        return PredictionMatrix(preds[0].rows.copy())
    stack = np.stack([pm.rows for pm in preds])
    m = float(len(preds))
    out = np.empty(shape)
    for i in range(shape[0]):
        for j in range(shape[1]):
            out[i, j] = math.fsum(stack[:, i, j]) / m
    return PredictionMatrix(out)


def _simplex_vector(v, label: str) -> np.ndarray:
    p = np.asarray(v, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ShapeMismatchError(f"{label} must be a non-empty 1-D vector")
    if not np.isfinite(p).all() or (p < 0.0).any() or (p > 1.0).any():
        raise NotOnSimplexError(f"{label} entries must lie in [0, 1]")
    if abs(float(p.sum()) - 1.0) > ROW_SUM_TOL:
        raise NotOnSimplexError(f"{label} must sum to 1 within {ROW_SUM_TOL}")
    return p


def _h(p: np.ndarray, q: np.ndarray) -> float:
    # only the log argument is clamped; p multiplies unclamped
    return float(-np.sum(p * np.log(np.clip(q, LOG_EPS, 1.0))))


def sym_cross_entropy(p, q) -> float:
    """H(p,q) + H(q,p) with natural logs, log arguments clamped to [1e-12, 1]."""
    pv = _simplex_vector(p, "p")
    qv = _simplex_vector(q, "q")
    if pv.shape != qv.shape:
        raise ShapeMismatchError(f"p has {pv.size} entries, q has {qv.size}")
    return _h(pv, qv) + _h(qv, pv)


@dataclass(eq=False)
class DistanceMatrix:
    """Symmetric non-negative model-to-model dissimilarities."""

    values: np.ndarray
    names: list[str]
    raw_diagonal: np.ndarray | None = None
    diagonal_policy: str = "zeroed"

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ShapeMismatchError("distance matrix must be square")
        if len(self.names) != v.shape[0]:
            raise LengthMismatchError(
                f"{v.shape[0]} rows but {len(self.names)} names"
            )
        if len(set(self.names)) != len(self.names):
            raise ValueError("model names must be unique")
        if not np.isfinite(v).all() or (v < 0.0).any():
            raise ValueError("distances must be finite and non-negative")
        if np.abs(v - v.T).max() > SYMMETRY_TOL:
            raise AsymmetricInputError(
                f"matrix asymmetric beyond {SYMMETRY_TOL}"
            )

    @property
    def size(self) -> int:
        return self.values.shape[0]


def distance_matrix(preds: list[PredictionMatrix], names: list[str]) -> DistanceMatrix:
    """Pairwise Dist(f,g) = (1/N) sum_i H_sym(p_i^f, p_i^g).

    The diagonal is zeroed; the raw self-distances (2 * mean entropy) are
    kept in .raw_diagonal. Upper-triangle cells are computed once and
    mirrored, so symmetry is bitwise.
    """
    if len(preds) < 2:
        raise TooFewModelsError(f"need >= 2 models, got {len(preds)}")
    if len(names) != len(preds):
        raise LengthMismatchError(f"{len(preds)} models but {len(names)} names")
    shape = preds[0].rows.shape
    for pm in preds[1:]:
        if pm.rows.shape != shape:
            raise ShapeMismatchError(
                f"prediction shapes differ: {shape} vs {pm.rows.shape}"
            )
    m = len(preds)
    n = float(shape[0])
    stack = [np.ascontiguousarray(pm.rows) for pm in preds]
    logs = [np.log(np.clip(rows, LOG_EPS, 1.0)) for rows in stack]
    pairs = [(i, j) for i in range(m) for j in range(i, m)]

    def one_pair(ij: tuple[int, int]) -> float:
        i, j = ij
        total = _kernels.pair_symxent_sum(stack[i], logs[j], stack[j], logs[i])
        return -total / n

    cells = run_tasks(one_pair, pairs)
    values = np.zeros((m, m))
    raw_diag = np.zeros(m)
    for (i, j), cell in zip(pairs, cells):
        if i == j:
            raw_diag[i] = cell
        else:
            values[i, j] = cell
            values[j, i] = cell
    return DistanceMatrix(values=values, names=list(names), raw_diagonal=raw_diag)


@dataclass(eq=False)
class Embedding:
    """MDS coordinates with the retained (clamped) eigenvalues.

    spectrum holds the full unclamped eigenvalue list in descending
    order, for diagnostics.
    """

    coords: np.ndarray
    eigenvalues: list[float]
    labels: list[str]
    spectrum: list[float]

    def __post_init__(self):
        self.coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if self.coords.ndim != 2:
            raise ShapeMismatchError("coords must be 2-D")
        if len(self.labels) != self.coords.shape[0]:
            raise LengthMismatchError("one label per embedded point required")
        if len(self.eigenvalues) != self.coords.shape[1]:
            raise LengthMismatchError("one eigenvalue per retained dimension required")

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


def classical_mds(dm: DistanceMatrix, dim: int = 2) -> Embedding:
    """Torgerson embedding of a zero-diagonal symmetric dissimilarity matrix.

    B = -1/2 * J (D o D) J with J = I - (1/n) 11^T, eigendecomposed with
    cyclic Jacobi sweeps; coordinates are the top-dim eigenvectors scaled
    by sqrt(max(eigenvalue, 0)). Each coordinate column's first component
    larger than 1e-9 in magnitude is made positive, fixing the reflection.
    """
    n = dm.size
    dim = int(dim)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if n < dim + 1:
        raise DimensionTooLargeError(f"{n} points cannot span {dim} dimensions")
    if (np.diagonal(dm.values) != 0.0).any():
        raise ValueError("distance matrix diagonal must be zero (see diagonal_policy)")
    sq = dm.values * dm.values
    # row means double as column means (symmetric input), and the two are
    # added before subtracting so B comes out bitwise symmetric for Jacobi
    means = sq.mean(axis=1)
    grand = float(sq.mean())
    b = -0.5 * (sq - (means[:, None] + means[None, :]) + grand)
    evals, evecs = _kernels.jacobi_eigh(b, JACOBI_MAX_SWEEPS, JACOBI_TOL)
    order = np.argsort(-evals, kind="stable")
    spectrum = [float(evals[i]) for i in order]
    top = order[:dim]
    coords = np.array(evecs[:, top])
    for col in range(dim):
        column = coords[:, col]
        nonzero = np.flatnonzero(np.abs(column) > SIGN_EPS)
        if len(nonzero) and column[nonzero[0]] < 0.0:
            coords[:, col] = -column
    retained = np.maximum(np.array(spectrum[:dim]), 0.0)
    coords = coords * np.sqrt(retained)
    return Embedding(
        coords=coords,
        eigenvalues=[float(v) for v in retained],
        labels=list(dm.names),
        spectrum=spectrum,
    )


def _point_distance(coords: np.ndarray, i: int, j: int) -> float:
    acc = 0.0
    for k in range(coords.shape[1]):
        d = float(coords[i, k]) - float(coords[j, k])
        acc += d * d
    return math.sqrt(acc)


def stress(dm: DistanceMatrix, emb: Embedding) -> float:
    """Kruskal stress-1 of an embedding against the input dissimilarities."""
    if emb.size != dm.size:
        raise ShapeMismatchError(
            f"embedding has {emb.size} points, matrix has {dm.size}"
        )
    num = 0.0
    den = 0.0
    for i in range(dm.size - 1):
        for j in range(i + 1, dm.size):
            dij = float(dm.values[i, j])
            eij = _point_distance(emb.coords, i, j)
            diff = dij - eij
            num += diff * diff
            den += dij * dij
    if den == 0.0:
        raise DegenerateDistancesError("all pairwise distances are zero")
    return math.sqrt(num / den)


@dataclass(eq=False)
class DiversityBundle:
    """Everything an external plotter needs: distances, layout, labels,
    per-model accuracy annotations, and the layout's stress."""

    distances: DistanceMatrix
    embedding: Embedding
    accuracies: list[float | None]
    stress: float


def diversity_report(
    preds: list[PredictionMatrix],
    names: list[str],
    accuracies: list[float | None] | None = None,
    dim: int = 2,
) -> DiversityBundle:
    """Distance matrix + MDS embedding + stress for a set of models."""
    if accuracies is None:
        accuracies = [None] * len(preds)
    if len(accuracies) != len(preds):
        raise LengthMismatchError(
            f"{len(preds)} models but {len(accuracies)} accuracies"
        )
    dm = distance_matrix(preds, names)
    emb = classical_mds(dm, dim=dim)
    # all-zero distances collapse the layout to one point, which preserves
    # them exactly; report 0 instead of the undefined 0/0 ratio
    bundle_stress = 0.0 if not np.any(dm.values) else stress(dm, emb)
    return DiversityBundle(
        distances=dm,
        embedding=emb,
        accuracies=list(accuracies),
        stress=bundle_stress,
    )


def write_distance_csv(dm: DistanceMatrix, path: str | Path) -> None:
    """Header row/column of model names around the repr-formatted matrix."""
    rows = [["name", *dm.names]]
    for i, name in enumerate(dm.names):
        rows.append([name, *[repr(float(v)) for v in dm.values[i]]])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def load_distance_csv(path: str | Path) -> DistanceMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows or rows[0][:1] != ["name"]:
        raise MalformedFileError(f"{path}: expected a 'name' header column")
    names = rows[0][1:]
    if len(rows) != len(names) + 1:
        raise MalformedFileError(f"{path}: expected {len(names)} data rows")
    values = np.zeros((len(names), len(names)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(names) + 1 or row[0] != names[i]:
            raise MalformedFileError(f"{path}: row {i} does not match header names")
        try:
            values[i] = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise MalformedFileError(f"{path}: {exc}") from exc
    return DistanceMatrix(values=values, names=names)


def write_embedding_csv(
    emb: Embedding, accuracies: list[float | None], path: str | Path
) -> None:
    """Rows of name,x,y,val_accuracy (accuracy cell empty when unknown).

    1-D layouts (two-model runs) are written with y = 0.0.
    """
    if emb.dim not in (1, 2):
        raise ShapeMismatchError("embedding CSV is defined for 1-D or 2-D layouts")
    if len(accuracies) != emb.size:
        raise LengthMismatchError("one accuracy slot per embedded point required")
    rows = [["name", "x", "y", "val_accuracy"]]
    for name, point, acc in zip(emb.labels, emb.coords, accuracies):
        x = point[0]
        y = point[1] if emb.dim == 2 else 0.0
        cell = "" if acc is None else repr(float(acc))
        rows.append([name, repr(float(x)), repr(float(y)), cell])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def load_embedding_csv(path: str | Path) -> tuple[list[str], np.ndarray, list[float | None]]:
    """Returns (names, coords, accuracies) from an embedding CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows or rows[0] != ["name", "x", "y", "val_accuracy"]:
        raise MalformedFileError(f"{path}: expected header name,x,y,val_accuracy")
    names: list[str] = []
    coords: list[list[float]] = []
    accs: list[float | None] = []
    for row in rows[1:]:
        if len(row) != 4:
            raise MalformedFileError(f"{path}: rows must have 4 cells")
        names.append(row[0])
        try:
            coords.append([float(row[1]), float(row[2])])
            accs.append(None if row[3] == "" else float(row[3]))
        except ValueError as exc:
            raise MalformedFileError(f"{path}: {exc}") from exc
    return names, np.array(coords), accs


DIAGNOSTICS_FORMAT_VERSION = 1


def diagnostics_dict(bundle: DiversityBundle) -> dict:
    """JSON-ready diagnostics: raw diagonal, spectrum, stress, policies."""
    dm = bundle.distances
    raw = None if dm.raw_diagonal is None else [float(v) for v in dm.raw_diagonal]
    return {
        "format_version": DIAGNOSTICS_FORMAT_VERSION,
        "model_names": list(dm.names),
        "diagonal_policy": dm.diagonal_policy,
        "raw_diagonal": raw,
        "eigenvalue_spectrum": list(bundle.embedding.spectrum),
        "retained_eigenvalues": list(bundle.embedding.eigenvalues),
        "stress": bundle.stress,
        "accuracies": bundle.accuracies,
    }
