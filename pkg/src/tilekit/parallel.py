"""Order-preserving parallel map controlled by ``TILEKIT_THREADS``.

Results never depend on the worker count: work items are independent and
results are returned in input order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("TILEKIT_THREADS", "").strip()
        try:
            threads = int(env) if env else 1
        except ValueError:
            threads = 1
    return max(1, threads)


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    items = list(items)
    n = min(thread_count(threads), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
