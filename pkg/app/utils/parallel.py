"""Worker pool helpers."""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from app.config import settings

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: Optional[int] = None) -> int:
    """
    Resolve a worker count.

    Args:
        workers: Requested count; None falls back to settings.WORKERS, and 0 means
            available parallelism

    Returns:
        A positive worker count
    """
    if workers is None:
        workers = settings.WORKERS
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = 1) -> List[R]:
    """
    Apply fn to every item and return results in input order.

    Results never depend on the worker count: callers reduce the returned list
    in index order.
    """
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
