"""Hawkes 路径模拟模块.

通过 Poisson 嵌入(稀疏化)求解 (X, H, λ) 在 [0, T] 上的轨道,
并计算归一化统计量 F_T 与 Y_T.

稀疏化使用局部上界 λ̄:
  - 指数核: 两次事件之间 λ 单调递减, 当前强度即为上界
  - Erlang 核: 在宽度 Δ 的窗口上取激励 (A + ξs)e^{-βs} 的精确上确界
  - 列表核: 在宽度为一个网格步长的窗口上逐事件取 Φ 的上确界
候选点处实际强度超过 λ̄ 时抛出 MajorantViolationError.
"""

from __future__ import annotations

import csv
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from .exceptions import (
    CouplingError,
    DomainError,
    MajorantViolationError,
    ReportWriteError,
    UnsupportedKernelError,
)
from .kernels import ErlangKernel, ExponentialKernel, Kernel, TabulatedKernel, ZeroKernel
from .rng import RandomState
from .types import FloatArray

if TYPE_CHECKING:
    from pathlib import Path

    from .bounds import WeightFunction
    from .marks import MarkDistribution

logger = logging.getLogger(__name__)

# 上界比较的相对容差(仅吸收浮点舍入)
MAJORANT_SLACK = 1e-12

# Erlang 核上界刷新窗口的默认系数 Δ = ERLANG_WINDOW_FACTOR / β
ERLANG_WINDOW_FACTOR = 0.1


@dataclass(frozen=True, eq=False)
class HawkesPath:
    """[0, T] 上的一条复合 Hawkes 轨道.

    Attributes:
        horizon: 时间范围 T
        mu: 基础强度 μ
        event_times: 严格递增的事件时间, 均在 (0, T]
        marks: 每个事件的标记
        intensity_pre: 每个事件时刻的左极限强度 λ_{T_i−}
        seed: 生成该路径的随机流(如有)
        xi_terminal: Erlang 辅助过程 ξ_T (仅 Erlang 核)
    """

    horizon: float
    mu: float
    event_times: FloatArray
    marks: FloatArray
    intensity_pre: FloatArray
    seed: RandomState | None = None
    xi_terminal: float | None = None

    @property
    def count(self) -> int:
        """H_T."""
        return int(self.event_times.size)

    @property
    def total_mark(self) -> float:
        """X_T = Σ Y_i."""
        return float(self.marks.sum())

    @classmethod
    def empty(cls, horizon: float, mu: float) -> HawkesPath:
        """没有事件的路径."""
        none = np.empty(0, dtype=np.float64)
        return cls(horizon, mu, none, none.copy(), none.copy())


# ===================== 激励状态 =====================


class _Excitation(ABC):
    """λ − μ 的前向演化状态.

    now 为当前时刻; value() 返回 now 处的左极限激励,
    add_event() 在 now 处登记一个事件.
    """

    window: float = math.inf

    def __init__(self, start: float = 0.0) -> None:
        self.now = start

    @abstractmethod
    def advance(self, dt: float) -> None:
        """前进 dt."""

    @abstractmethod
    def value(self) -> float:
        """当前激励."""

    @abstractmethod
    def window_sup(self, width: float) -> float:
        """激励在 [now, now + width] 上的上界(不计新事件)."""

    @abstractmethod
    def add_event(self) -> None:
        """在当前时刻登记事件."""


class _ZeroExcitation(_Excitation):
    def advance(self, dt: float) -> None:
        self.now += dt

    def value(self) -> float:
        return 0.0

    def window_sup(self, width: float) -> float:
        return 0.0

    def add_event(self) -> None:
        return None


class _ExponentialExcitation(_Excitation):
    def __init__(self, kernel: ExponentialKernel, start: float = 0.0) -> None:
        super().__init__(start)
        self.alpha = kernel.alpha
        self.beta = kernel.beta
        self.level = 0.0

    def advance(self, dt: float) -> None:
        self.now += dt
        self.level *= math.exp(-self.beta * dt)

    def value(self) -> float:
        return self.level

    def window_sup(self, width: float) -> float:
        return self.level

    def add_event(self) -> None:
        self.level += self.alpha


class _ErlangExcitation(_Excitation):
    """Markov 对 (A, ξ): A = λ − μ, ξ = Σ α e^{-β(t−T_i)}."""

    def __init__(self, kernel: ErlangKernel, window: float, start: float = 0.0) -> None:
        super().__init__(start)
        self.alpha = kernel.alpha
        self.beta = kernel.beta
        self.window = window
        self.level = 0.0
        self.xi = 0.0

    def advance(self, dt: float) -> None:
        decay = math.exp(-self.beta * dt)
        self.level = (self.level + self.xi * dt) * decay
        self.xi *= decay
        self.now += dt

    def value(self) -> float:
        return self.level

    def window_sup(self, width: float) -> float:
        if self.xi <= 0.0:
            return self.level
        peak = 1.0 / self.beta - self.level / self.xi
        if 0.0 < peak < width:
            return (self.level + self.xi * peak) * math.exp(-self.beta * peak)
        end = (self.level + self.xi * width) * math.exp(-self.beta * width)
        return max(self.level, end)

    def add_event(self) -> None:
        self.xi += self.alpha


class _TabulatedExcitation(_Excitation):
    """逐事件求和; 超出支撑的事件被丢弃."""

    def __init__(self, kernel: TabulatedKernel, window: float, start: float = 0.0) -> None:
        super().__init__(start)
        self.kernel = kernel
        self.window = window
        self.events: list[float] = []

    def _active(self) -> FloatArray:
        cutoff = self.now - self.kernel.support_end
        while self.events and self.events[0] < cutoff:
            self.events.pop(0)
        return np.asarray(self.events, dtype=np.float64)

    def advance(self, dt: float) -> None:
        self.now += dt

    def value(self) -> float:
        active = self._active()
        if active.size == 0:
            return 0.0
        return float(np.sum(self.kernel.phi(self.now - active)))

    def window_sup(self, width: float) -> float:
        active = self._active()
        if active.size == 0:
            return 0.0
        grid, values = self.kernel.grid, self.kernel.values
        lo = self.now - active
        hi = lo + width
        best = np.maximum(self.kernel.phi(lo), self.kernel.phi(hi))
        # width 不超过最小网格间距, 开区间 (lo, hi) 内至多一个网格点
        idx = np.searchsorted(grid, lo, side="right")
        inside = idx < grid.size
        idx = np.minimum(idx, grid.size - 1)
        interior = np.where(inside & (grid[idx] < hi), values[idx], 0.0)
        return float(np.sum(np.maximum(best, interior)))

    def add_event(self) -> None:
        self.events.append(self.now)


def _excitation(kernel: Kernel, window: float | None, start: float = 0.0) -> _Excitation:
    if isinstance(kernel, ZeroKernel):
        return _ZeroExcitation(start)
    if isinstance(kernel, ExponentialKernel):
        return _ExponentialExcitation(kernel, start)
    if isinstance(kernel, ErlangKernel):
        return _ErlangExcitation(kernel, window or ERLANG_WINDOW_FACTOR / kernel.beta, start)
    if isinstance(kernel, TabulatedKernel):
        step = float(np.min(np.diff(kernel.grid)))
        return _TabulatedExcitation(kernel, min(window, step) if window else step, start)
    raise UnsupportedKernelError(kernel.name, "simulate_hawkes")


@dataclass
class _ThinningResult:
    times: list[float]
    marks: list[float]
    pre: list[float]
    heights: list[float]


def _thin(
    state: _Excitation,
    mu: float,
    end: float,
    marks: MarkDistribution,
    generator: np.random.Generator,
    floor: Any = None,
) -> _ThinningResult:
    """在 (state.now, end] 上对 μ + 激励 做稀疏化.

    floor 非空时为基础路径的强度函数, 候选点的高度 θ 放在 (floor, floor + λ̄] 上,
    并逐候选点检查带宽不重叠.
    """
    out = _ThinningResult([], [], [], [])
    while True:
        remaining = end - state.now
        if remaining <= 0.0:
            break
        width = min(state.window, remaining)
        last = width >= remaining
        bound = mu + state.window_sup(width)
        step = generator.exponential(1.0 / bound) if bound > 0.0 else math.inf
        if step > width:
            if last:
                break
            state.advance(width)
            continue
        state.advance(step)
        intensity = mu + state.value()
        if intensity > bound * (1.0 + MAJORANT_SLACK):
            raise MajorantViolationError(state.now, intensity, bound)
        height = (1.0 - generator.random()) * bound
        theta = height
        if floor is not None:
            base = floor(state.now)
            theta = base + height
            if theta <= base:
                raise CouplingError(f"candidate at t={state.now:.12g} falls inside the base band")
            accepted = theta <= base + intensity
        else:
            accepted = height <= intensity
        if accepted:
            out.times.append(state.now)
            out.heights.append(theta)
            out.marks.append(float(marks.sample(generator)))
            out.pre.append(intensity)
            state.add_event()
    return out


def _check_model(mu: float, T: float) -> None:
    if not (math.isfinite(mu) and mu > 0):
        raise DomainError("mu", mu, "requires mu > 0")
    if not (math.isfinite(T) and T > 0):
        raise DomainError("T", T, "requires T > 0")


def simulate_hawkes(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    rng: RandomState,
    *,
    window: float | None = None,
) -> HawkesPath:
    """用 Poisson 嵌入稀疏化模拟一条复合 Hawkes 路径.

    Args:
        kernel: 激励核
        mu: 基础强度
        marks: 标记分布
        T: 时间范围
        rng: 随机流
        window: Erlang/列表核的上界刷新窗口 Δ

    Returns:
        HawkesPath

    Raises:
        DomainError: mu ≤ 0 或 T ≤ 0 时
        MajorantViolationError: 上界实现错误时
    """
    _check_model(mu, T)
    state = _excitation(kernel, window)
    result = _thin(state, mu, T, marks, rng.generator())
    xi_terminal = None
    if isinstance(state, _ErlangExcitation):
        state.advance(T - state.now)
        xi_terminal = state.xi
    return HawkesPath(
        horizon=T,
        mu=mu,
        event_times=np.asarray(result.times, dtype=np.float64),
        marks=np.asarray(result.marks, dtype=np.float64),
        intensity_pre=np.asarray(result.pre, dtype=np.float64),
        seed=rng,
        xi_terminal=xi_terminal,
    )


def simulate_hawkes_markov(
    kernel: ExponentialKernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    rng: RandomState,
) -> HawkesPath:
    """指数核的精确事件驱动模拟(组合法).

    下一个到达时间取基础部分 Exp(μ) 与衰减激励部分的最小值,
    后者在激励总量 E/β 内可能永不发生.

    Raises:
        UnsupportedKernelError: 非指数核时
    """
    if not isinstance(kernel, ExponentialKernel):
        raise UnsupportedKernelError(kernel.name, "simulate_hawkes_markov")
    _check_model(mu, T)
    generator = rng.generator()
    alpha, beta = kernel.alpha, kernel.beta
    times: list[float] = []
    mark_values: list[float] = []
    pre: list[float] = []
    now, level = 0.0, 0.0
    while True:
        baseline = generator.exponential(1.0 / mu)
        excited = math.inf
        if level > 0.0:
            d = 1.0 + beta * math.log(1.0 - generator.random()) / level
            if d > 0.0:
                excited = -math.log(d) / beta
        gap = min(baseline, excited)
        if now + gap > T:
            break
        now += gap
        level *= math.exp(-beta * gap)
        times.append(now)
        mark_values.append(float(marks.sample(generator)))
        pre.append(mu + level)
        level += alpha
    return HawkesPath(
        horizon=T,
        mu=mu,
        event_times=np.asarray(times, dtype=np.float64),
        marks=np.asarray(mark_values, dtype=np.float64),
        intensity_pre=np.asarray(pre, dtype=np.float64),
        seed=rng,
    )


def simulate_excitation(
    kernel: Kernel,
    marks: MarkDistribution,
    start: float,
    end: float,
    generator: np.random.Generator,
    *,
    floor: Any = None,
    window: float | None = None,
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """模拟由 start 处的一个移民触发, 基础强度为 0 的级联.

    强度为 Φ(s − start) + Σ Φ(s − T̂_j), 事件均在 (start, end].

    Args:
        kernel: 激励核
        marks: 标记分布
        start: 移民时刻
        end: 终止时刻
        generator: 随机数生成器
        floor: 基础路径的强度函数, 给定时候选高度位于基础带之上
        window: 上界刷新窗口

    Returns:
        (事件时间, 标记, 左极限强度, 被接受候选点的高度 θ)
    """
    state = _excitation(kernel, window, start)
    state.add_event()
    result = _thin(state, 0.0, end, marks, generator, floor=floor)
    return (
        np.asarray(result.times, dtype=np.float64),
        np.asarray(result.marks, dtype=np.float64),
        np.asarray(result.pre, dtype=np.float64),
        np.asarray(result.heights, dtype=np.float64),
    )


# ===================== 路径泛函 =====================


def _check_in_horizon(path: HawkesPath, t: float, argument: str = "t") -> None:
    if not 0.0 <= t <= path.horizon:
        raise DomainError(argument, t, f"requires 0 <= {argument} <= T = {path.horizon}")


def excitation_sum(kernel: Kernel, event_times: FloatArray, t: float, *, inclusive: bool = False) -> float:
    """Σ Φ(t − T_i), 求和范围为 T_i < t (inclusive 时为 T_i ≤ t)."""
    cut = np.searchsorted(event_times, t, side="right" if inclusive else "left")
    if cut == 0:
        return 0.0
    return float(np.sum(kernel.phi(t - event_times[:cut])))


def intensity_at(path: HawkesPath, kernel: Kernel, mu: float, t: float) -> float:
    """左极限强度 λ_t = μ + Σ_{T_i < t} Φ(t − T_i).

    Raises:
        DomainError: t ∉ [0, T] 时
    """
    _check_in_horizon(path, t)
    return mu + excitation_sum(kernel, path.event_times, t)


def intensity_terminal(path: HawkesPath, kernel: Kernel, mu: float) -> float:
    """λ_T, 计入 T 时刻及之前的全部事件."""
    return mu + excitation_sum(kernel, path.event_times, path.horizon, inclusive=True)


def aux_xi(path: HawkesPath, kernel: Kernel) -> float:
    """Erlang 辅助过程 ξ_T = Σ α e^{-β(T−T_i)}.

    Raises:
        UnsupportedKernelError: 非 Erlang 核时
    """
    if not isinstance(kernel, ErlangKernel):
        raise UnsupportedKernelError(kernel.name, "aux_xi")
    lags = path.horizon - path.event_times
    return float(np.sum(kernel.alpha * np.exp(-kernel.beta * lags)))


def compensator(path: HawkesPath, kernel: Kernel, mu: float, upper: float | None = None) -> float:
    """∫₀ᵘ λ_t dt = μu + Σ_{T_i < u} ∫₀^{u−T_i} Φ.

    Args:
        path: 路径
        kernel: 激励核
        mu: 基础强度
        upper: 积分上限, 默认为 T

    Returns:
        补偿子
    """
    u = path.horizon if upper is None else upper
    _check_in_horizon(path, u, "upper")
    cut = np.searchsorted(path.event_times, u, side="left")
    return mu * u + float(np.sum(kernel.integral(u - path.event_times[:cut])))


def statistic_F(path: HawkesPath, kernel: Kernel, mu: float, marks: MarkDistribution) -> float:
    """F_T = (X_T − m∫₀ᵀ λ_t dt)/√T."""
    T = path.horizon
    return (path.total_mark - marks.m * compensator(path, kernel, mu)) / math.sqrt(T)


def statistic_Y(path: HawkesPath, kernel: Kernel, mu: float) -> float:
    """Y_T = (H_T − E[H_T])/√T, E[H_T] 取自精确的更新公式."""
    from .moments import expected_count

    T = path.horizon
    return (path.count - expected_count(kernel, mu, T)) / math.sqrt(T)


def statistic_weighted(
    path: HawkesPath,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    weight: WeightFunction,
) -> float:
    """确定性权重的补偿积分 Σ w(T_i)Y_i − m∫₀ᵀ w_t λ_t dt.

    Args:
        path: 路径
        kernel: 激励核
        mu: 基础强度
        marks: 标记分布
        weight: 分段常数权重

    Returns:
        加权统计量
    """
    jumps = float(np.sum(weight(path.event_times) * path.marks))
    edges = [compensator(path, kernel, mu, b) for b in weight.breaks]
    drift = float(np.dot(weight.levels, np.diff(edges)))
    return jumps - marks.m * drift


# ===================== 存储候选流 =====================


@dataclass(frozen=True, eq=False)
class PoissonCandidateStream:
    """[0, T] × [0, θmax] 上显式存储的 Poisson 候选点(按时间排序).

    Attributes:
        horizon: 时间范围 T
        ceiling: 高度上限 θmax
        times: 候选时间
        thetas: 候选高度
        marks: 每个候选点携带的标记
    """

    horizon: float
    ceiling: float
    times: FloatArray
    thetas: FloatArray
    marks: FloatArray

    @classmethod
    def draw(cls, T: float, ceiling: float, marks: MarkDistribution, rng: RandomState) -> PoissonCandidateStream:
        """抽取一个强度为 1 的 Poisson 候选流.

        Args:
            T: 时间范围
            ceiling: 高度上限
            marks: 标记分布
            rng: 随机流

        Returns:
            候选流
        """
        generator = rng.generator()
        n = int(generator.poisson(T * ceiling))
        times = np.sort(generator.uniform(0.0, T, n))
        thetas = generator.uniform(0.0, ceiling, n)
        values = np.asarray(marks.sample(generator, n), dtype=np.float64)
        return cls(T, ceiling, times, thetas, values)


def solve_from_stream(
    stream: PoissonCandidateStream,
    kernel: Kernel,
    mu: float,
    extra_atom: tuple[float, float] | None = None,
) -> HawkesPath:
    """在存储的候选流上逐点求解嵌入方程: 候选 (s, θ) 被接受当且仅当 θ ≤ λ_{s−}.

    Args:
        stream: 候选流
        kernel: 激励核
        mu: 基础强度
        extra_atom: 额外插入的原子 (t, x), 无论高度一律接受

    Returns:
        求解得到的路径

    Raises:
        CouplingError: 强度超过候选流上限时
    """
    pending = extra_atom is not None
    times: list[float] = []
    values: list[float] = []
    pre: list[float] = []

    def intensity(s: float) -> float:
        return mu + excitation_sum(kernel, np.asarray(times, dtype=np.float64), s)

    def insert_atom() -> None:
        assert extra_atom is not None
        pre.append(intensity(extra_atom[0]))
        times.append(extra_atom[0])
        values.append(extra_atom[1])

    for s, theta, mark in zip(stream.times, stream.thetas, stream.marks, strict=True):
        if pending and extra_atom is not None and extra_atom[0] <= s:
            insert_atom()
            pending = False
        lam = intensity(float(s))
        if lam > stream.ceiling:
            raise CouplingError(f"intensity {lam:.6g} at t={s:.6g} exceeds stream ceiling {stream.ceiling:.6g}")
        if theta <= lam:
            times.append(float(s))
            values.append(float(mark))
            pre.append(lam)
    if pending:
        insert_atom()
    return HawkesPath(
        horizon=stream.horizon,
        mu=mu,
        event_times=np.asarray(times, dtype=np.float64),
        marks=np.asarray(values, dtype=np.float64),
        intensity_pre=np.asarray(pre, dtype=np.float64),
    )


def write_path_csv(path: HawkesPath, file: str | Path) -> None:
    """写出路径 CSV: event_index,time,mark,intensity_pre.

    Raises:
        ReportWriteError: 写入失败时
    """
    try:
        with open(file, "w", newline="", encoding="utf-8") as handle:  # noqa: PTH123
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["event_index", "time", "mark", "intensity_pre"])
            for i, (t, y, lam) in enumerate(zip(path.event_times, path.marks, path.intensity_pre, strict=True)):
                writer.writerow([i, repr(float(t)), repr(float(y)), repr(float(lam))])
    except OSError as e:
        raise ReportWriteError(file, e) from e
