"""Work-ceiling bookkeeping and a deterministic worker pool."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

from .errors import WorkCeilingExceeded

# Default ceiling on elementary operations for exhaustive kernels.
DEFAULT_WORK_CEILING = 10**9


def check_work(estimate: int, ceiling: int | None, what: str, *, hint=None) -> int:
    """Refuse a computation whose estimated cost exceeds ``ceiling``.

    ``ceiling=None`` disables the guard (the CLI --force path).  Returns the
    estimate so call sites can log it.
    """
    if ceiling is not None and estimate > ceiling:
        raise WorkCeilingExceeded(
            f"{what}: estimated work {estimate:.3g} exceeds ceiling {ceiling:.3g}",
            estimate=estimate, ceiling=ceiling, hint=hint)
    return estimate


def parallel_map(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    """Map ``fn`` over ``items`` with results in input order.

    Results are merged in index order, so the output is identical for any
    worker count.  ``workers`` <= 1 runs serially.
    """
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
