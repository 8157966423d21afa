"""Concurrency utilities for Active Rates."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Any, Callable, Hashable, List, Mapping, Optional, TypeVar

R = TypeVar('R')


@dataclass
class TaskResult:
    """Container for task execution results."""
    task_id: Hashable
    result: Any
    exception: Optional[Exception] = None
    execution_time: float = 0.0
    success: bool = True


def default_worker_count() -> int:
    return min(32, (os.cpu_count() or 1) + 4)


def create_thread_pool(max_workers: Optional[int] = None,
                       thread_name_prefix: str = "active-rates") -> ThreadPoolExecutor:
    """Create a configured thread pool executor."""
    if max_workers is None:
        max_workers = default_worker_count()

    return ThreadPoolExecutor(
        max_workers=max_workers,
        thread_name_prefix=thread_name_prefix,
    )


def _timed(task: Callable[[], R]) -> Callable[[], tuple]:
    def run() -> tuple:
        start_time = time.perf_counter()
        result = task()
        return result, time.perf_counter() - start_time
    return run


def run_parallel_tasks(tasks: Mapping[Hashable, Callable[[], R]],
                       max_workers: Optional[int] = None,
                       timeout: Optional[float] = None,
                       on_complete: Optional[Callable[[TaskResult], None]] = None,
                       ) -> List[TaskResult]:
    """Run keyed tasks in parallel; failures are recorded, not raised."""
    results = []

    with create_thread_pool(max_workers) as executor:
        # Submit all tasks
        future_to_task = {
            executor.submit(_timed(task)): task_id
            for task_id, task in tasks.items()
        }

        # Collect results
        for future in as_completed(future_to_task, timeout=timeout):
            task_id = future_to_task[future]

            try:
                result, execution_time = future.result()
                task_result = TaskResult(
                    task_id=task_id,
                    result=result,
                    execution_time=execution_time,
                    success=True
                )
            except Exception as e:
                task_result = TaskResult(
                    task_id=task_id,
                    result=None,
                    exception=e,
                    success=False
                )

            results.append(task_result)
            if on_complete is not None:
                on_complete(task_result)

    return results

