"""随机流模块.

每条重复路径使用由 (主种子, 块, 流编号) 唯一确定的计数器型生成器
(Philox), 因此结果与调度顺序无关.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# 每条重复路径内预留的子流数量 (基础路径 + 平移网格点)
STREAMS_PER_REPLICATION = 1 << 16


def stream_index(replication: int, point: int = 0) -> int:
    """重复 r 在网格点 k 处的流编号 r·2¹⁶ + k.

    Args:
        replication: 重复编号 r
        point: 子流编号 k (0 为基础路径, k ≥ 1 为第 k 个平移网格点)

    Returns:
        流编号

    Raises:
        ValueError: 编号越界时
    """
    if replication < 0 or not 0 <= point < STREAMS_PER_REPLICATION:
        msg = f"invalid stream coordinates (replication={replication}, point={point})"
        raise ValueError(msg)
    return replication * STREAMS_PER_REPLICATION + point


@dataclass(frozen=True)
class RandomState:
    """可复现的随机流标识.

    相同的 (seed, stream, block) 总是产生逐位相同的随机序列.

    Attributes:
        seed: 64 位主种子
        stream: 流编号 (见 stream_index)
        block: 实验块编号, 用于区分同一实验中不同的 T 或子报告

    Examples:
        >>> a = RandomState(7, 3).generator().random()
        >>> b = RandomState(7, 3).generator().random()
        >>> a == b
        True
    """

    seed: int
    stream: int = 0
    block: int = 0

    def __post_init__(self) -> None:
        """校验种子范围."""
        if not 0 <= self.seed < 2**64:
            msg = f"seed must be a 64-bit unsigned integer, got {self.seed}"
            raise ValueError(msg)
        if self.stream < 0 or self.block < 0:
            msg = "stream and block must be nonnegative"
            raise ValueError(msg)

    def generator(self) -> np.random.Generator:
        """创建该流的新生成器."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.block, self.stream))
        return np.random.Generator(np.random.Philox(sequence))

    def with_stream(self, stream: int) -> RandomState:
        """同一种子与块下的另一条流."""
        return replace(self, stream=stream)

    def with_block(self, block: int) -> RandomState:
        """同一种子下的另一个块 (流编号归零)."""
        return replace(self, block=block, stream=0)

    def for_replication(self, replication: int, point: int = 0) -> RandomState:
        """重复 r 网格点 k 处的流."""
        return self.with_stream(stream_index(replication, point))
