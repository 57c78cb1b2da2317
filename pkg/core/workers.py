"""
Workers Module

Indexed task execution on a thread pool. Results are returned in task order,
so outputs never depend on scheduling or on the number of workers.
"""

import concurrent.futures
from typing import Callable, List, Optional, TypeVar

from loguru import logger

from .settings import worker_count

T = TypeVar("T")


def map_indexed(task: Callable[[int], T], n_tasks: int, max_workers: Optional[int] = None) -> List[T]:
    """
    Run ``task(i)`` for i in range(n_tasks) and return results by index.

    Args:
        task: Callable taking the task index
        n_tasks: Number of tasks
        max_workers: Worker threads (default: NNTS_THREADS)

    Returns:
        List of results, results[i] == task(i)
    """
    workers = max_workers or worker_count()
    if workers <= 1 or n_tasks <= 1:
        return [task(i) for i in range(n_tasks)]

    logger.debug(f"Dispatching {n_tasks} tasks to {workers} workers")
    results: List[Optional[T]] = [None] * n_tasks
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(task, i): i for i in range(n_tasks)}
        for future in concurrent.futures.as_completed(future_to_index):
            results[future_to_index[future]] = future.result()
    return results  # type: ignore[return-value]
