from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from .errors import InvalidInputError

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "AEKIT_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Explicit argument, else ``$AEKIT_THREADS``, else 1."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        try:
            threads = int(raw) if raw else 1
        except ValueError:
            raise InvalidInputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if threads < 1:
        raise InvalidInputError(f"thread count must be positive, got {threads}")
    return threads


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """``[fn(x) for x in items]``, possibly on a thread pool; output order never depends on scheduling."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
