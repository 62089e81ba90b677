"""并行重复模块.

按重复编号分发独立任务; 结果总是按编号顺序返回, 与调度无关.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import TYPE_CHECKING, TypeVar

if TYPE_CHECKING:
    from collections.abc import Callable

logger = logging.getLogger(__name__)

R = TypeVar("R")


def default_workers() -> int:
    """机器的并行度."""
    return os.cpu_count() or 1


def replicate(fn: Callable[[int], R], n: int, workers: int | None = None) -> list[R]:
    """对重复编号 0..n-1 求 fn.

    Args:
        fn: 可被 pickle 的函数(模块级函数或其 functools.partial)
        n: 重复次数
        workers: 进程数, None 表示机器并行度, ≤ 1 时在当前进程内执行

    Returns:
        按编号排列的结果
    """
    count = default_workers() if workers is None else workers
    if count <= 1 or n <= 1:
        return [fn(r) for r in range(n)]
    count = min(count, n)
    chunksize = max(1, n // (count * 8))
    logger.debug("dispatching %d replications to %d workers (chunksize=%d)", n, count, chunksize)
    with ProcessPoolExecutor(max_workers=count) as pool:
        return list(pool.map(fn, range(n), chunksize=chunksize))
