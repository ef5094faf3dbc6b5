"""Deterministic data-parallel map.

Each task computes one output serially under its own copy of the caller's
precision context, so results are bit-identical for any worker count.
gmpy2 keeps the active context per thread, hence the explicit hand-off.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

from .mpnum import PrecisionContext

T = TypeVar("T")
R = TypeVar("R")

_state = threading.local()
_width = 1
_pool: ThreadPoolExecutor | None = None
_pool_lock = threading.Lock()


def get_threads() -> int:
    return _width


def set_threads(k: int) -> None:
    global _width, _pool
    if k < 1:
        raise ValueError("thread count must be >= 1")
    with _pool_lock:
        if _pool is not None and k != _width:
            _pool.shutdown(wait=True)
            _pool = None
        _width = k


@contextmanager
def threads(k: int) -> Iterator[None]:
    old = _width
    set_threads(k)
    try:
        yield
    finally:
        set_threads(old)


def _executor() -> ThreadPoolExecutor:
    global _pool
    with _pool_lock:
        if _pool is None:
            _pool = ThreadPoolExecutor(max_workers=_width, thread_name_prefix="feig")
        return _pool


def pmap(fn: Callable[[T], R], items: Iterable[T], ctx: PrecisionContext) -> list[R]:
    """``[fn(x) for x in items]`` evaluated at ``ctx`` precision, possibly in parallel."""
    items = list(items)
    if _width == 1 or len(items) < 2 or getattr(_state, "inside", False):
        with ctx.active():
            return [fn(x) for x in items]

    def run(chunk: Sequence[T]) -> list[R]:
        _state.inside = True
        try:
            with ctx.active():
                return [fn(x) for x in chunk]
        finally:
            _state.inside = False

    # contiguous chunks, reassembled in order
    k = min(_width, len(items))
    bounds = [len(items) * i // k for i in range(k + 1)]
    chunks = [items[bounds[i]:bounds[i + 1]] for i in range(k)]
    out: list[R] = []
    for part in _executor().map(run, chunks):
        out.extend(part)
    return out
