"""计时模块.

提供实验各阶段的耗时记录:
- Stopwatch: 上下文管理器计时器
- TimingMetrics: 按阶段汇总的耗时指标

耗时只写入日志, 不写入 CSV, 以保证输出逐字节可复现.
"""

from __future__ import annotations

from collections import defaultdict
from time import perf_counter
from typing import Any


class TimingMetrics:
    """耗时指标收集器.

    Attributes:
        section_count: 每个阶段的记录次数
        section_times: 每个阶段的累计耗时(秒)
    """

    def __init__(self) -> None:
        """初始化指标."""
        self.section_count: dict[str, int] = defaultdict(int)
        self.section_times: dict[str, float] = defaultdict(float)

    def record(self, section: str, elapsed_time: float) -> None:
        """记录一次阶段耗时.

        Args:
            section: 阶段名
            elapsed_time: 耗时(秒)
        """
        self.section_count[section] += 1
        self.section_times[section] += elapsed_time

    def reset(self) -> None:
        """重置所有指标."""
        self.section_count.clear()
        self.section_times.clear()

    @property
    def total_time(self) -> float:
        """全部阶段的总耗时(秒)."""
        return sum(self.section_times.values())

    def time(self, section: str) -> Stopwatch:
        """返回一个结束时自动记录到 section 的计时器."""
        return Stopwatch(self, section)

    def get_stats(self) -> dict[str, Any]:
        """获取统计信息.

        Returns:
            阶段名到 {count, total_s} 的映射, 以及总耗时
        """
        return {
            "sections": {
                name: {"count": self.section_count[name], "total_s": round(self.section_times[name], 6)}
                for name in sorted(self.section_times)
            },
            "total_s": round(self.total_time, 6),
        }

    def __repr__(self) -> str:
        """返回字符串表示."""
        return f"TimingMetrics(sections={len(self.section_times)}, total={self.total_time:.3f}s)"


class Stopwatch:
    """计时器.

    Examples:
        >>> with Stopwatch() as watch:
        ...     pass
        >>> watch.elapsed_time >= 0
        True
    """

    def __init__(self, metrics: TimingMetrics | None = None, section: str | None = None) -> None:
        """初始化计时器.

        Args:
            metrics: 结束时写入的指标收集器
            section: 阶段名
        """
        self.metrics = metrics
        self.section = section
        self.start_time: float | None = None
        self.end_time: float | None = None

    def __enter__(self) -> Stopwatch:
        """开始计时."""
        self.start_time = perf_counter()
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        """结束计时并记录."""
        self.end_time = perf_counter()
        if self.metrics is not None and self.section is not None:
            self.metrics.record(self.section, self.elapsed_time)

    @property
    def elapsed_time(self) -> float:
        """耗时(秒); 计时未结束时返回到当前为止的耗时."""
        if self.start_time is None:
            return 0.0
        end = self.end_time if self.end_time is not None else perf_counter()
        return end - self.start_time
