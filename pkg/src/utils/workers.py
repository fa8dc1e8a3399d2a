"""
Worker Pool
Order-preserving parallel map over independent simulation jobs
"""

from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from .logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1,
                 kind: str = "process") -> List[R]:
    """Apply ``fn`` to every item and return results in input order.

    ``kind`` is "process" (fn and items must pickle) or "thread".
    Exceptions propagate from the first failing item in input order.
    """
    work = list(items)
    if not work:
        return []

    jobs = max(1, min(int(jobs), len(work)))
    if jobs == 1:
        return [fn(item) for item in work]

    if kind == "process":
        executor_cls = ProcessPoolExecutor
    elif kind == "thread":
        executor_cls = ThreadPoolExecutor
    else:
        raise ValueError(f"Unknown executor kind: {kind}")

    logger.debug(f"Dispatching {len(work)} jobs to {jobs} {kind} workers")
    with executor_cls(max_workers=jobs) as executor:
        futures = [executor.submit(fn, item) for item in work]
        return [future.result() for future in futures]
