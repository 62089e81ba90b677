"""Gaussian 距离模块.

一维经验 W₁ 用分位数表示计算:
    d̂ = (1/n)Σᵢ |x₍ᵢ₎ − γ·Q((i − 0.5)/n)|
其中 Q 为标准正态分位数函数. 标准误由 bootstrap 重抽样给出,
收敛速率由 (log T, log d̂) 上的最小二乘回归估计.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import TYPE_CHECKING

import numpy as np
from scipy.stats import linregress, norm

from .exceptions import DomainError
from .moments import asymptotic_constants
from .parallel import replicate
from .simulation import simulate_hawkes, statistic_F, statistic_Y
from .types import StatisticTag

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .kernels import Kernel
    from .marks import MarkDistribution
    from .rng import RandomState
    from .types import ArrayLike, FloatArray

logger = logging.getLogger(__name__)

DEFAULT_N_BOOT = 200

# 每个 T 的最少样本数
MIN_SAMPLES = 500

# 下限超过 d̂ 的该比例时记录警告
FLOOR_WARNING_RATIO = 0.25

# w1_floor 的重复次数
FLOOR_REPLICATIONS = 20

MIN_RATE_POINTS = 4


@dataclass(frozen=True)
class DistanceEntry:
    """单个 T 的距离估计.

    Attributes:
        T: 时间范围
        n: 样本数
        d_hat: 经验 W₁
        se_boot: bootstrap 标准误
        floor: 同样本量下精确 Gaussian 样本的期望经验 W₁
    """

    T: float
    n: int
    d_hat: float
    se_boot: float
    floor: float = 0.0

    @property
    def floor_dominated(self) -> bool:
        """有限样本下限是否超过 d̂ 的 25%."""
        return self.floor > FLOOR_WARNING_RATIO * self.d_hat


@dataclass(frozen=True)
class DistanceSeries:
    """按 T 排序的距离曲线.

    Attributes:
        statistic_tag: 统计量 (F 或 Y)
        gamma2: 使用的极限方差
        entries: 各 T 的估计
    """

    statistic_tag: StatisticTag
    gamma2: float
    entries: tuple[DistanceEntry, ...] = field(default_factory=tuple)

    @property
    def horizons(self) -> FloatArray:
        """T 值."""
        return np.array([e.T for e in self.entries], dtype=np.float64)

    @property
    def distances(self) -> FloatArray:
        """d̂ 值."""
        return np.array([e.d_hat for e in self.entries], dtype=np.float64)


@dataclass(frozen=True)
class RateFit:
    """log d̂ = intercept + slope·log T 的最小二乘拟合.

    Attributes:
        statistic_tag: 拟合的统计量
        slope: 斜率, 理论值 −1/2
        intercept: 截距
        r_squared: 决定系数
    """

    statistic_tag: StatisticTag
    slope: float
    intercept: float
    r_squared: float


def _check_gamma2(gamma2: float) -> None:
    if not gamma2 > 0:
        raise DomainError("gamma2", gamma2, "requires gamma2 > 0")


def _gaussian_quantiles(n: int, gamma: float) -> FloatArray:
    positions = (np.arange(1, n + 1, dtype=np.float64) - 0.5) / n
    return gamma * norm.ppf(positions)


def empirical_w1_to_gaussian(samples: ArrayLike, gamma2: float) -> float:
    """样本经验分布与 N(0, γ²) 之间的 W₁.

    Args:
        samples: 非空样本
        gamma2: 目标方差 γ²

    Returns:
        (1/n)Σᵢ |x₍ᵢ₎ − γ·Q((i − 0.5)/n)|

    Raises:
        DomainError: γ² ≤ 0 或样本为空时

    Examples:
        >>> empirical_w1_to_gaussian([0.0], 1.0)
        0.0
    """
    _check_gamma2(gamma2)
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if x.size == 0:
        raise DomainError("samples", [], "requires at least one sample")
    return float(np.mean(np.abs(x - _gaussian_quantiles(x.size, math.sqrt(gamma2)))))


def bootstrap_se(samples: ArrayLike, gamma2: float, n_boot: int, rng: RandomState) -> float:
    """经验 W₁ 的 bootstrap 标准误.

    每次重抽样 n 个样本(有放回)并重新计算距离.
    """
    _check_gamma2(gamma2)
    x = np.asarray(samples, dtype=np.float64).ravel()
    if n_boot < 2:
        raise DomainError("n_boot", n_boot, "requires n_boot >= 2")
    generator = rng.generator()
    quantiles = _gaussian_quantiles(x.size, math.sqrt(gamma2))
    stats = np.empty(n_boot)
    for b in range(n_boot):
        resample = np.sort(x[generator.integers(0, x.size, x.size)])
        stats[b] = np.mean(np.abs(resample - quantiles))
    return float(stats.std(ddof=1))


def w1_floor(n: int, gamma2: float, rng: RandomState, replications: int = FLOOR_REPLICATIONS) -> float:
    """n 个精确 N(0, γ²) 样本的经验 W₁ 期望(模拟估计).

    这是距离估计在样本量 n 下可分辨的最小量级.
    """
    _check_gamma2(gamma2)
    generator = rng.generator()
    gamma = math.sqrt(gamma2)
    values = [empirical_w1_to_gaussian(gamma * generator.standard_normal(n), gamma2) for _ in range(replications)]
    return float(np.mean(values))


def _statistic_replication(
    r: int,
    *,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    tag: StatisticTag,
    rng: RandomState,
    window: float | None,
) -> float:
    path = simulate_hawkes(kernel, mu, marks, T, rng.for_replication(r), window=window)
    if tag is StatisticTag.F:
        return statistic_F(path, kernel, mu, marks)
    return statistic_Y(path, kernel, mu)


def sample_statistic(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    n: int,
    tag: StatisticTag,
    rng: RandomState,
    *,
    workers: int | None = None,
    window: float | None = None,
) -> FloatArray:
    """模拟 n 条路径并返回统计量 F_T 或 Y_T 的样本."""
    fn = partial(
        _statistic_replication, kernel=kernel, mu=mu, marks=marks, T=T, tag=tag, rng=rng, window=window
    )
    return np.asarray(replicate(fn, n, workers), dtype=np.float64)


def limit_variance(kernel: Kernel, mu: float, marks: MarkDistribution, tag: StatisticTag) -> float:
    """F 的极限方差 σ²ϑ², Y 的极限方差 σ̃²."""
    constants = asymptotic_constants(kernel, mu, marks)
    return constants.limit_variance if tag is StatisticTag.F else constants.sigma2_tilde


def distance_curve(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T_grid: Sequence[float],
    n: int,
    statistic_tag: StatisticTag,
    rng: RandomState,
    *,
    gamma2: float | None = None,
    n_boot: int = DEFAULT_N_BOOT,
    workers: int | None = None,
    window: float | None = None,
) -> DistanceSeries:
    """在 T 网格上估计 d_W(统计量, N(0, γ²)).

    第 i 个 T 使用块 rng.block + i; 块内流 0..n−1 生成路径,
    bootstrap 与下限估计使用块外的两条附加流.

    Args:
        kernel: 激励核
        mu: 基础强度
        marks: 标记分布
        T_grid: 严格递增的正时间范围
        n: 每个 T 的样本数
        statistic_tag: F 或 Y
        rng: 随机流
        gamma2: 目标方差, 默认取统计量的极限方差
        n_boot: bootstrap 重抽样次数
        workers: 进程数
        window: 稀疏化上界刷新窗口

    Returns:
        DistanceSeries

    Raises:
        DomainError: 网格非法或 n < 500 时
    """
    grid = [float(T) for T in T_grid]
    if not grid or any(T <= 0 for T in grid) or any(b <= a for a, b in zip(grid, grid[1:], strict=False)):
        raise DomainError("T_grid", grid, "requires a nonempty strictly increasing grid of positive values")
    if n < MIN_SAMPLES:
        raise DomainError("n", n, f"requires n >= {MIN_SAMPLES}")
    target = limit_variance(kernel, mu, marks, statistic_tag) if gamma2 is None else gamma2
    _check_gamma2(target)

    entries: list[DistanceEntry] = []
    for i, T in enumerate(grid):
        block = rng.with_block(rng.block + i)
        samples = sample_statistic(kernel, mu, marks, T, n, statistic_tag, block, workers=workers, window=window)
        d_hat = empirical_w1_to_gaussian(samples, target)
        se = bootstrap_se(samples, target, n_boot, block.for_replication(n))
        floor = w1_floor(n, target, block.for_replication(n + 1))
        entry = DistanceEntry(T, n, d_hat, se, floor)
        if entry.floor_dominated:
            logger.warning(
                "T=%g: finite-sample W1 floor %.4g exceeds %.0f%% of d_hat %.4g",
                T,
                floor,
                100 * FLOOR_WARNING_RATIO,
                d_hat,
            )
        logger.info("T=%g: %s d_hat=%.5g (se %.2g)", T, statistic_tag.value, d_hat, se)
        entries.append(entry)
    return DistanceSeries(statistic_tag, target, tuple(entries))


def fit_rate(series: DistanceSeries) -> RateFit:
    """(log T, log d̂) 上的普通最小二乘.

    Raises:
        DomainError: 少于 4 个点或存在 d̂ ≤ 0 时
    """
    if len(series.entries) < MIN_RATE_POINTS:
        raise DomainError("series", len(series.entries), f"requires at least {MIN_RATE_POINTS} entries")
    distances = series.distances
    if np.any(distances <= 0):
        raise DomainError("d_hat", distances.tolist(), "requires all distances > 0")
    result = linregress(np.log(series.horizons), np.log(distances))
    return RateFit(series.statistic_tag, float(result.slope), float(result.intercept), float(result.rvalue**2))
