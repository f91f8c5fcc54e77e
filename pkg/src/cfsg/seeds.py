"""Deterministic seed tree: master seed -> topology -> stream.

Every topology index owns an independent set of generators, so results do
not depend on how topologies are scheduled across workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

GEOMETRY, CF_CHANNEL, SC_CHANNEL = range(3)


def stream(master: int, topology: int, which: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master, spawn_key=(topology, which))
    return np.random.default_rng(ss)


def default_threads() -> int:
    v = os.environ.get("CFSG_THREADS")
    return max(1, int(v)) if v else 1


def parallel_map(fn, items, threads: int | None = None) -> list:
    """``list(map(fn, items))`` on a thread pool; output order matches input order."""
    threads = default_threads() if threads is None else max(1, int(threads))
    items = list(items)
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
