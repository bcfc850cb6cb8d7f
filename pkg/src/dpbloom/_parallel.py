"""Deterministic batch fan-out for Monte Carlo work."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

BATCH_SIZE = 50_000


def thread_count() -> int:
    """Worker cap from DPBLOOM_THREADS; 0 or unset means one per CPU."""
    raw = os.environ.get("DPBLOOM_THREADS", "").strip()
    n = int(raw) if raw else 0
    if n < 0:
        raise ValueError(f"DPBLOOM_THREADS must be >= 0, got {raw!r}")
    return n or (os.cpu_count() or 1)


def map_batches(
    fn: Callable[[int, int, np.random.Generator], T],
    total: int,
    rng_seed: int,
    batch_size: int = BATCH_SIZE,
) -> list[T]:
    """Run ``fn(start, size, rng)`` over fixed batches covering ``total`` items.

    Batch boundaries and per-batch seeds depend only on (total, rng_seed,
    batch_size), so results do not depend on the worker count.
    """
    sizes = [batch_size] * (total // batch_size)
    if total % batch_size:
        sizes.append(total % batch_size)
    children = np.random.SeedSequence(rng_seed).spawn(len(sizes))
    starts = np.cumsum([0] + sizes[:-1]).tolist()
    jobs = [(st, s, np.random.default_rng(c)) for st, s, c in zip(starts, sizes, children)]
    workers = min(thread_count(), len(jobs))
    if workers <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
