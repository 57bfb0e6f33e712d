"""Runs independent evaluations across worker processes.
"""

import concurrent.futures
import os
from logging import Logger
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_jobs() -> int:
    return os.cpu_count() or 1


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    jobs: Optional[int] = None,
    logger: Optional[Logger] = None) -> List[R]:
    """Applies a function to every item, preserving input order.

    Args:
        fn (callable): A picklable, module-level function.

        items (iterable): The inputs.

        jobs (int): Number of worker processes. Runs in the calling
            process when 1. Defaults to the machine's CPU count.

        logger (`Logger`): Optional logger for progress messages.

    Returns:
        (list): One result per input, in input order.
    """
    items = list(items)
    jobs = jobs or default_jobs()
    if jobs == 1 or len(items) <= 1:
        if logger:
            logger.debug(f"Evaluating {len(items)} item(s) sequentially.")
        return [fn(item) for item in items]

    workers = min(jobs, len(items))
    if logger:
        logger.debug(f"Evaluating {len(items)} item(s) across {workers} processes.")
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
