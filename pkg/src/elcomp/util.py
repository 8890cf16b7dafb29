"""Small shared runtime helpers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    """Worker cap from ELCOMP_THREADS; defaults to 1 (fully serial)."""
    raw = os.environ.get("ELCOMP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def amap(fn, items) -> list:
    """Map preserving input order; threaded only when ELCOMP_THREADS > 1.

    Each work item must be independent and deterministic, so the result
    does not depend on the worker count.
    """
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
