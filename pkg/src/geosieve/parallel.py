"""Deterministic chunked parallelism.

Work is split into index-ordered chunks and results are merged back by chunk
index, so output never depends on the number of workers.  The worker count
defaults to the machine's parallelism and is capped by the GEOSIEVE_THREADS
environment variable; heavy kernels are numpy einsums, which release the
GIL, so threads suffice.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["worker_count", "chunked_map"]


def worker_count() -> int:
    avail = os.cpu_count() or 1
    try:
        cap = int(os.environ.get("GEOSIEVE_THREADS", ""))
    except ValueError:
        return avail
    return min(cap, avail) if cap >= 1 else avail


def chunked_map(fn, items: np.ndarray, chunk_size: int = 2048) -> list:
    """Apply fn to index-ordered chunks of items; return results in order."""
    chunks = [items[i:i + chunk_size] for i in range(0, len(items), chunk_size)]
    workers = worker_count()
    if workers <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))
