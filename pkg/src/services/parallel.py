"""
Parallel map với thứ tự kết quả cố định.

max_workers == 1 chạy tuần tự trong process hiện tại (dễ debug, dùng trong
tests); lớn hơn dùng ProcessPoolExecutor. executor.map trả kết quả theo thứ
tự input nên output không phụ thuộc scheduling.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], max_workers: int = 1) -> list[R]:
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("parallel_map: %d tasks on %d workers", len(items), max_workers)
    with ProcessPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(fn, items))
