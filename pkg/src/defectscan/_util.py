"""Shared internals: atomic file writes and the worker-pool policy."""

from __future__ import annotations

import os
import tempfile
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor

_ENV_THREADS = "DEFECTSCAN_THREADS"

# Below this many items a thread pool costs more than it saves.
_MIN_PARALLEL_ITEMS = 16


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    """Write *data* via a temp file plus rename, so a reader never sees a
    half-written file."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(
        dir=directory, prefix=os.path.basename(path) + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def worker_count() -> int:
    """Worker cap for per-window parallel work.

    Reads ``DEFECTSCAN_THREADS`` when set (must be a positive integer),
    otherwise defaults to the machine's CPU count.
    """
    raw = os.environ.get(_ENV_THREADS)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ValueError(f"{_ENV_THREADS} must be a positive integer, got {raw!r}")
    return n


def map_ordered(fn: Callable, items: Iterable) -> list:
    """``map`` that may fan out to a thread pool but always preserves input
    order, keeping downstream reductions bit-reproducible."""
    items = list(items)
    workers = worker_count()
    if workers <= 1 or len(items) < _MIN_PARALLEL_ITEMS:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
