"""Utilities module for Active Rates."""

from __future__ import annotations

from .helpers import (
    setup_logging,
    derive_trial_seed,
    format_duration,
    ensure_directory,
)

from .concurrency import (
    TaskResult,
    run_parallel_tasks,
    create_thread_pool,
)

__all__ = [
    # Helpers
    "setup_logging",
    "derive_trial_seed",
    "format_duration",
    "ensure_directory",

    # Concurrency
    "TaskResult",
    "run_parallel_tasks",
    "create_thread_pool",
]
