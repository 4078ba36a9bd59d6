"""Order-preserving parallel map capped by ``ORLICZ_KIT_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV = "ORLICZ_KIT_THREADS"


def thread_cap() -> int:
    raw = os.environ.get(ENV, "").strip()
    if not raw:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items) -> list:
    """``[fn(x) for x in items]``, evaluated on up to :func:`thread_cap` threads.

    Results come back in input order, so reports do not depend on scheduling.
    """
    items = list(items)
    n = thread_cap()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
