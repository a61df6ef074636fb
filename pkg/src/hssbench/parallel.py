"""Deterministic block-parallel Monte Carlo.

Draws are split into fixed-size blocks; block ``b`` always uses the
stream ``rng.child(b)`` and partial sums are reduced in block order, so
the result does not depend on the number of worker threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import SeededRng

BLOCK_SIZE = 4096


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("HSS_BENCH_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class Moments:
    n: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        self.n += values.size
        self.total += float(values.sum())
        self.total_sq += float(np.square(values).sum())

    def merge(self, other: "Moments") -> None:
        self.n += other.n
        self.total += other.total
        self.total_sq += other.total_sq

    @property
    def mean(self) -> float:
        return self.total / self.n

    @property
    def std_error(self) -> float:
        if self.n < 2:
            return 0.0
        var = (self.total_sq - self.n * self.mean**2) / (self.n - 1)
        return float(np.sqrt(max(var, 0.0) / self.n))


def run_blocks(n_draws: int, rng: SeededRng, block_fn: Callable[[np.random.Generator, int], np.ndarray],
               threads: Optional[int] = None, block_size: int = BLOCK_SIZE) -> Moments:
    """Evaluate ``block_fn(generator, size)`` over blocks covering ``n_draws`` draws."""
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    sizes = [min(block_size, n_draws - s) for s in range(0, n_draws, block_size)]
    jobs = [(rng.child(b).generator(), size) for b, size in enumerate(sizes)]
    threads = default_threads() if threads is None else max(1, int(threads))

    def work(job):
        gen, size = job
        mo = Moments()
        mo.add(block_fn(gen, size))
        return mo

    if threads == 1 or len(jobs) == 1:
        parts = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, jobs))
    out = Moments()
    for p in parts:
        out.merge(p)
    return out


def map_ordered(fn: Callable, items, threads: Optional[int] = None) -> list:
    """``list(map(fn, items))`` on a thread pool, results in input order."""
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
