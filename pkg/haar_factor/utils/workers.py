"""
Worker pool helpers for the read-only fan-out steps (witness checks, Jones scans).
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional, TypeVar

import psutil

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "HAAR_FACTOR_THREADS"


def worker_count(configured: Optional[Any] = None) -> int:
    """
    Number of worker threads to use.

    HAAR_FACTOR_THREADS wins over the configured value, which wins over the
    logical CPU count. The result is always at least 1.
    """
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    if configured:
        try:
            return max(1, int(configured))
        except (TypeError, ValueError):
            pass
    return max(1, psutil.cpu_count(logical=True) or 1)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply ``fn`` to every item, preserving input order."""
    items = list(items)
    count = min(worker_count(workers), len(items))
    if count <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=count) as pool:
        return list(pool.map(fn, items))
