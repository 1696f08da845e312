"""Ordered parallel map used for quadrature cells, strata and slide steps"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import config

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else FRACMIN_THREADS, never below one"""
    return max(1, int(threads if threads is not None else config.THREADS))


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Map ``func`` over ``items`` keeping input order.

    Results come back in submission order so any reduction done by the caller
    runs in a fixed order and stays bitwise reproducible.
    """
    items = list(items)
    workers = resolve_threads(threads)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def fixed_order_sum(values: Iterable[float]) -> float:
    """Left-to-right sum (no pairwise reordering)"""
    total = 0.0
    for v in values:
        total += float(v)
    return total
