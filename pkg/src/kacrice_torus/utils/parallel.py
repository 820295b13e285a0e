"""Thread pool for independent per-item numerical tasks."""

import logging
import threading
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import TypeVar

import psutil

from ..constants import DEFAULT_MAX_WORKERS

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def available_workers() -> int:
    """Number of usable CPUs, falling back to DEFAULT_MAX_WORKERS."""
    try:
        count = psutil.cpu_count(logical=True)
    except Exception as e:  # psutil can fail inside restricted containers
        logger.warning(f"Failed to query CPU count: {e}")
        count = None
    return int(count) if count else DEFAULT_MAX_WORKERS


def memory_usage_mb() -> float:
    """Resident memory of this process in MB (0.0 if unavailable)."""
    try:
        return float(psutil.Process().memory_info().rss / 1024 / 1024)
    except Exception as e:
        logger.warning(f"Failed to get memory usage: {e}")
        return 0.0


class WorkerPool:
    """Runs a function over indexed items and returns results in index order.

    The result of item ``i`` only depends on ``i`` and the item itself, so the
    output is the same for any number of workers. The first failing item
    aborts the batch and its exception is re-raised; if several items had
    already failed, the one with the lowest index is reported.
    """

    def __init__(self, max_workers: int | None = None):
        self.max_workers = max_workers or available_workers()
        if self.max_workers < 1:
            raise ValueError(f"max_workers must be positive, got {self.max_workers}")

        self._stats_lock = threading.Lock()
        self._stats = {"completed": 0, "failed": 0}

    def map(self, func: Callable[[int, T], R], items: Sequence[T]) -> list[R]:
        """Apply ``func(index, item)`` to every item."""
        if self.max_workers == 1 or len(items) <= 1:
            results = []
            for index, item in enumerate(items):
                try:
                    results.append(func(index, item))
                except Exception:
                    self._record(failed=True)
                    raise
                self._record(failed=False)
            return results

        results_by_index: dict[int, R] = {}
        failures: dict[int, BaseException] = {}
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_index = {
                executor.submit(func, index, item): index
                for index, item in enumerate(items)
            }
            for future in as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    results_by_index[index] = future.result()
                    self._record(failed=False)
                except Exception as e:
                    self._record(failed=True)
                    failures[index] = e
                    # Remaining queued work is pointless once one item failed
                    for pending in future_to_index:
                        pending.cancel()

        if failures:
            first = min(failures)
            logger.error(f"Task {first} failed: {failures[first]}")
            raise failures[first]
        return [results_by_index[i] for i in range(len(items))]

    def _record(self, failed: bool) -> None:
        with self._stats_lock:
            self._stats["failed" if failed else "completed"] += 1

    def get_stats(self) -> dict[str, int]:
        """Get task statistics."""
        with self._stats_lock:
            return self._stats.copy()

    def reset_stats(self) -> None:
        """Reset task statistics."""
        with self._stats_lock:
            self._stats = {"completed": 0, "failed": 0}
