"""
阶段任务池模块

负责并行执行互相独立的逐阶段计算，包括:
1. 线程池大小取自 task_queue.max_workers
2. 结果按阶段顺序返回
3. 失败任务记录日志后向上抛出
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from .config_manager import config_manager

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


class StagePool:
    """逐阶段任务池"""

    def __init__(self, max_workers: Optional[int] = None):
        """初始化任务池

        Args:
            max_workers: 最大工作线程数，默认读取配置
        """
        self.max_workers = max_workers or config_manager.get('task_queue.max_workers', 4)
        self.executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> 'StagePool':
        self.executor = ThreadPoolExecutor(max_workers=self.max_workers,
                                           thread_name_prefix='lamicone-stage')
        return self

    def __exit__(self, exc_type, exc, tb):
        self.shutdown()

    def map(self, func: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """对每个阶段执行 func，结果按输入顺序返回

        Args:
            func: 阶段函数
            items: 阶段输入

        Returns:
            List[R]: 按阶段顺序的结果
        """
        if self.executor is None or len(items) <= 1 or self.max_workers == 1:
            return [self._run(func, index, item) for index, item in enumerate(items, start=1)]

        futures = [self.executor.submit(self._run, func, index, item)
                   for index, item in enumerate(items, start=1)]
        return [future.result() for future in futures]

    def _run(self, func: Callable[[T], R], index: int, item: T) -> R:
        try:
            result = func(item)
            logger.debug(f"阶段 {index} 计算完成")
            return result
        except Exception as e:
            logger.error(f"阶段 {index} 计算失败: {e}")
            raise

    def shutdown(self):
        """停止任务池"""
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None
