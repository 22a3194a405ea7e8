"""Deterministic fan-out helper.

Results always come back in input order, so any worker count yields
byte-identical downstream artifacts. Workers receive shared state once via
the initializer instead of per task.
"""

from __future__ import annotations

import multiprocessing
from typing import Callable, Sequence


def ordered_map(
    fn: Callable,
    items: Sequence,
    workers: int = 1,
    initializer: Callable | None = None,
    initargs: tuple = (),
) -> list:
    if workers <= 1 or len(items) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [fn(x) for x in items]
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:  # platforms without fork
        ctx = multiprocessing.get_context()
    chunksize = max(1, len(items) // (workers * 4))
    with ctx.Pool(workers, initializer=initializer, initargs=initargs) as pool:
        return pool.map(fn, items, chunksize=chunksize)
