"""Bounded thread pool and progress reporting for batch work.

Results are always returned in input order so that every reduction downstream is
independent of how many threads ran the work.
"""

from __future__ import annotations

import logging
import os
import threading
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Protocol, TypeVar

logger = logging.getLogger(__name__)

ItemT = TypeVar("ItemT")
ResultT = TypeVar("ResultT")
THREAD_NAME_PREFIX = "weighted-template-matcher"


class ProgressReporter(Protocol):
    """Progress contract for long-running loops."""

    def update(self, *, progress: float | None = None, message: str | None = None) -> None:
        """Publish optional progress in the inclusive range [0, 1] and a status message."""
        ...


class LogProgress:
    """Progress reporter that logs each update; safe to call from worker threads."""

    def __init__(self, name: str, *, target: logging.Logger | None = None) -> None:
        """Prefix every message with ``name``."""
        self._name = name
        self._logger = target or logger
        self._lock = threading.Lock()
        self._progress = 0.0

    @property
    def progress(self) -> float:
        """Last published progress, clamped to [0, 1]."""
        with self._lock:
            return self._progress

    def update(self, *, progress: float | None = None, message: str | None = None) -> None:
        """Clamp and record progress, then log it."""
        with self._lock:
            if progress is not None:
                self._progress = max(0.0, min(1.0, progress))
            current = self._progress
        self._logger.info("%s: %3.0f%% %s", self._name, current * 100.0, message or "")


def resolve_thread_count(threads: int | None) -> int:
    """Map ``None`` or ``0`` to the CPU count and validate explicit values."""
    if threads is None or threads == 0:
        return max(1, os.cpu_count() or 1)
    if threads < 0:
        raise ValueError(f"threads must be >= 0, got {threads}")
    return threads


def map_ordered(
    work: Callable[[ItemT], ResultT],
    items: Iterable[ItemT],
    *,
    threads: int | None = 1,
    progress: ProgressReporter | None = None,
    message: str = "processing",
) -> list[ResultT]:
    """Apply ``work`` to every item and return results in input order.

    One thread runs inline without a pool. Worker exceptions propagate to the
    caller after the pool shuts down.

    Args:
        work: Pure function of one item.
        items: Inputs; consumed once.
        threads: Pool size; ``0`` or ``None`` uses every core.
        progress: Optional reporter updated as results complete in order.
        message: Label used in progress messages.
    """
    pending: Sequence[ItemT] = list(items)
    total = len(pending)
    worker_count = min(resolve_thread_count(threads), max(1, total))
    results: list[ResultT] = []
    if worker_count == 1:
        for index, item in enumerate(pending):
            results.append(work(item))
            _report(progress, index + 1, total, message)
        return results
    logger.debug("running %d items of %s on %d threads", total, message, worker_count)
    with ThreadPoolExecutor(max_workers=worker_count, thread_name_prefix=THREAD_NAME_PREFIX) as executor:
        for index, result in enumerate(executor.map(work, pending)):
            results.append(result)
            _report(progress, index + 1, total, message)
    return results


def _report(progress: ProgressReporter | None, done: int, total: int, message: str) -> None:
    if progress is None or total == 0:
        return
    progress.update(progress=done / total, message=f"{message}: {done:,}/{total:,}")
