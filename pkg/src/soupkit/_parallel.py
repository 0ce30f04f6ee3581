"""Thread-count policy and a helper for running independent jobs.

SOUPKIT_THREADS caps internal parallelism; unset or 0 means one worker per
CPU. Work is only ever split across units that produce disjoint outputs,
and results are reassembled in input order, so numerics never depend on
scheduling.
"""

import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get("SOUPKIT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SOUPKIT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"SOUPKIT_THREADS must be >= 0, got {n}")
    if n == 0:
        return os.cpu_count() or 1
    return n


def run_tasks(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply fn to every item, results in input order."""
    seq: Sequence[T] = list(items)
    workers = min(thread_count(), len(seq))
    if workers <= 1:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))
