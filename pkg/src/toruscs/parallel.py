"""Execution width and canonical reductions.

Library functions take a ``workers`` argument; only the CLI reads the
environment.  Chunked work is reassembled in input order and every sum over
chunks goes through :func:`tree_sum`, so results do not depend on the width.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

WORKERS_ENV = "TORUSCS_WORKERS"


def workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    value = int(raw)
    if value < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1")
    return value


def map_chunks(fn: Callable[[slice], np.ndarray], length: int, workers: int, chunk: int = 64) -> list:
    """Apply ``fn`` to consecutive slices of range(length); results in order."""
    slices = [slice(i, min(i + chunk, length)) for i in range(0, length, chunk)]
    if workers <= 1 or len(slices) <= 1:
        return [fn(s) for s in slices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, slices))


def tree_sum(parts: np.ndarray | Sequence[np.ndarray]) -> np.ndarray:
    """Pairwise sum over the leading axis in a fixed order."""
    items = list(parts)
    if not items:
        raise ValueError("empty reduction")
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]
