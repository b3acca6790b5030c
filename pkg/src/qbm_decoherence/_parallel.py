"""Order-preserving map over a process pool."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_workers(workers):
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return int(workers)


def parallel_map(func, items, workers=1):
    """``list(map(func, items))``, fanned out over ``workers`` processes.

    ``workers=None`` keeps everything in-process; results always come back in
    input order, so the output does not depend on scheduling.
    """
    items = list(items)
    if workers is None or workers == 1 or len(items) < 2:
        return [func(item) for item in items]
    n = min(resolve_workers(workers), len(items))
    if n == 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * n))))
