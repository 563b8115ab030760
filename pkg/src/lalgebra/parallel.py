"""Deterministic work splitting.

Tasks are independent and results are merged in submission order, so a run
with any worker count produces byte-identical reports.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence


def pmap(func: Callable, items: Sequence, workers: int = 1) -> list:
    """Order-preserving map, fanned out over processes when workers > 1."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))
