"""Shared helpers for the test suite."""

import numpy as np

from soupkit import Checkpoint, PredictionMatrix

DEFAULT_SHAPES = {"layer0.weight": (3, 4), "layer0.bias": (3,), "stats.scale": (2, 2)}

# verdict lines collected by the acceptance suite; shown after the run,
# where capture no longer swallows them
ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_VERDICTS:
        terminalreporter.write_line(line)


def make_checkpoint(rng: np.random.Generator, shapes=None, scale: float = 1.0) -> Checkpoint:
    shapes = DEFAULT_SHAPES if shapes is None else shapes
    return Checkpoint(
        {name: rng.normal(0.0, scale, size=shape) for name, shape in shapes.items()}
    )


def random_simplex_rows(rng: np.random.Generator, n: int, c: int) -> PredictionMatrix:
    rows = rng.random((n, c)) + 1e-3
    rows /= rows.sum(axis=1, keepdims=True)
    return PredictionMatrix(rows)


class LookupEvaluator:
    """Maps the value of a single-cell tensor "w" to a fixed accuracy.

    Lets tests script exact greedy trajectories: candidates hold distinct
    dyadic values whose running means are also exact, so every averaged
    checkpoint hits a table key bit-for-bit.
    """

    def __init__(self, table: dict[float, float]):
        self.table = dict(table)
        self.calls = 0

    def __call__(self, cp, ds) -> float:
        self.calls += 1
        return self.table[float(cp.tensors["w"][0])]


def cell_checkpoint(value: float) -> Checkpoint:
    return Checkpoint({"w": np.array([float(value)])})
