"""耦合平移过程模块.

在 t 处插入一个原子后, 新增的级联 (X̂ᵗ, Ĥᵗ, λ̂ᵗ) 由 Poisson 测度在
带 (λ_u, λ_u + λ̂ᵗ_u] 中的点驱动, 这条带位于基础路径的带 [0, λ_u] 之上.

两种实现:
  - simulate_shift: 用新的随机流在平移带中稀疏化(分布上精确)
  - shift_from_stream: 读取显式存储的候选流, 用于加点重模拟的精确校验
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import CouplingError, DomainError
from .rng import STREAMS_PER_REPLICATION
from .simulation import (
    HawkesPath,
    PoissonCandidateStream,
    intensity_at,
    simulate_excitation,
    solve_from_stream,
)

if TYPE_CHECKING:
    from .bounds import WeightFunction
    from .kernels import Kernel
    from .marks import MarkDistribution
    from .rng import RandomState
    from .types import FloatArray

logger = logging.getLogger(__name__)

# A₁,₃ 内层求积的默认网格点数
DEFAULT_K_GRID = 64


@dataclass(frozen=True, eq=False)
class ShiftPath:
    """t 处插入原子后新增的级联.

    Attributes:
        shift_time: 平移时刻 t
        horizon: 时间范围 T
        hat_event_times: (t, T] 内递增的级联事件时间
        hat_marks: 级联事件的标记
        hat_intensity_pre: 级联事件处 λ̂ᵗ 的左极限
        hat_heights: 级联事件在 Poisson 测度中的高度 θ
        terminal_martingale: M̂ᵗ_T = X̂ᵗ_T − m∫ₜᵀ λ̂ᵗ_u du
    """

    shift_time: float
    horizon: float
    hat_event_times: FloatArray
    hat_marks: FloatArray
    hat_intensity_pre: FloatArray
    hat_heights: FloatArray
    terminal_martingale: float

    @property
    def hat_count(self) -> int:
        """Ĥᵗ_T."""
        return int(self.hat_event_times.size)

    def intensity_at(self, kernel: Kernel, s: float) -> float:
        """λ̂ᵗ_s = Φ(s − t) + Σ_{T̂_j < s} Φ(s − T̂_j), s ≤ t 时为 0."""
        t = self.shift_time
        if s <= t:
            return 0.0
        cut = np.searchsorted(self.hat_event_times, s, side="left")
        return float(kernel.phi(s - t)) + float(np.sum(kernel.phi(s - self.hat_event_times[:cut])))

    def hat_compensator(self, kernel: Kernel, upper: float | None = None) -> float:
        """∫ₜᵘ λ̂ᵗ_s ds."""
        u = self.horizon if upper is None else upper
        t = self.shift_time
        if u <= t:
            return 0.0
        cut = np.searchsorted(self.hat_event_times, u, side="left")
        return float(kernel.integral(u - t)) + float(np.sum(kernel.integral(u - self.hat_event_times[:cut])))

    def in_band(self, base: HawkesPath, kernel: Kernel, mu: float, *, rtol: float = 1e-9) -> bool:
        """检查每个级联事件的高度 θ 落在 (λ_s, λ_s + λ̂ᵗ_s] 中, 且记录的 λ̂ᵗ 与重算值一致."""
        for s, theta, pre in zip(self.hat_event_times, self.hat_heights, self.hat_intensity_pre, strict=True):
            floor = intensity_at(base, kernel, mu, float(s))
            hat = self.intensity_at(kernel, float(s))
            if not math.isclose(pre, hat, rel_tol=rtol, abs_tol=1e-12):
                return False
            if not floor < theta <= (floor + hat) * (1.0 + rtol):
                return False
        return True

    def weighted_martingale(self, kernel: Kernel, m: float, weight: WeightFunction) -> float:
        """Σ w(T̂_j)Ŷ_j − m∫ₜᵀ w_s λ̂ᵗ_s ds."""
        jumps = float(np.sum(weight(self.hat_event_times) * self.hat_marks))
        edges = [self.hat_compensator(kernel, max(b, self.shift_time)) for b in weight.breaks]
        return jumps - m * float(np.dot(weight.levels, np.diff(edges)))


@dataclass(frozen=True, eq=False)
class CoupledRun:
    """一条基础路径与其平移网格上的耦合级联.

    Attributes:
        base: 基础路径
        shifts: 网格点 t₁..t_K 上的平移路径
        grid: 平移时刻
        base_intensity: 各网格点处的 λ_t
        consistent: 每条平移路径的级联事件都落在基础路径之上的平移带内
    """

    base: HawkesPath
    shifts: tuple[ShiftPath, ...]
    grid: FloatArray
    base_intensity: FloatArray
    consistent: bool

    @property
    def terminal_martingales(self) -> FloatArray:
        """各网格点的 M̂ᵗ_T."""
        return np.array([s.terminal_martingale for s in self.shifts], dtype=np.float64)

    def lambda_hatM(self) -> float:
        """梯形求积 ∫₀ᵀ λ_t M̂ᵗ_T dt.

        Raises:
            CouplingError: 存在越出平移带的级联事件时
        """
        if not self.consistent:
            raise CouplingError("shift cascade left the band above the base path")
        return float(trapezoid(self.base_intensity * self.terminal_martingales, self.grid))


def _shift_result(
    kernel: Kernel,
    marks: MarkDistribution,
    t: float,
    T: float,
    times: FloatArray,
    values: FloatArray,
    pre: FloatArray,
    heights: FloatArray,
) -> ShiftPath:
    shift = ShiftPath(t, T, times, values, pre, heights, 0.0)
    return replace(shift, terminal_martingale=float(values.sum()) - marks.m * shift.hat_compensator(kernel))


def simulate_shift(
    base: HawkesPath,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    t: float,
    rng: RandomState,
    *,
    window: float | None = None,
) -> ShiftPath:
    """在基础路径之上的平移带中模拟 t 处原子触发的级联.

    Args:
        base: 基础路径
        kernel: 激励核
        mu: 基础强度
        marks: 标记分布
        t: 平移时刻
        rng: 平移带使用的新随机流
        window: 上界刷新窗口

    Returns:
        ShiftPath

    Raises:
        DomainError: t ∉ [0, T] 时
    """
    T = base.horizon
    if not 0.0 <= t <= T:
        raise DomainError("t", t, f"requires 0 <= t <= T = {T}")

    def floor(s: float) -> float:
        return intensity_at(base, kernel, mu, s)

    times, values, pre, heights = simulate_excitation(kernel, marks, t, T, rng.generator(), floor=floor, window=window)
    return _shift_result(kernel, marks, t, T, times, values, pre, heights)


def malliavin_derivative(shift: ShiftPath, x: float, T: float) -> float:
    """加点代价 D_{(t, λ_t, x)} F_T = (x + M̂ᵗ_T)/√T."""
    if not T > 0:
        raise DomainError("T", T, "requires T > 0")
    return (x + shift.terminal_martingale) / math.sqrt(T)


def shift_grid(T: float, K: int) -> FloatArray:
    """[0, T] 上 K 个等距平移时刻."""
    if not 2 <= K < STREAMS_PER_REPLICATION:
        raise DomainError("K", K, f"requires 2 <= K < {STREAMS_PER_REPLICATION}")
    return np.linspace(0.0, T, K)


def coupled_run(
    base: HawkesPath,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    K: int,
    rng: RandomState,
    *,
    window: float | None = None,
) -> CoupledRun:
    """在 K 个等距网格点上各做一次耦合平移模拟.

    网格点 k 使用流 rng.stream + k + 1 (基础路径占用 rng.stream 本身).

    Args:
        base: 基础路径
        kernel: 激励核
        mu: 基础强度
        marks: 标记分布
        K: 网格点数
        rng: 基础路径的随机流
        window: 上界刷新窗口

    Returns:
        CoupledRun
    """
    grid = shift_grid(base.horizon, K)
    shifts = tuple(
        simulate_shift(base, kernel, mu, marks, float(t), rng.with_stream(rng.stream + k + 1), window=window)
        for k, t in enumerate(grid)
    )
    intensity = np.array([intensity_at(base, kernel, mu, float(t)) for t in grid], dtype=np.float64)
    consistent = all(s.in_band(base, kernel, mu) for s in shifts)
    if not consistent:
        logger.warning("coupled run at T=%g has cascade events outside the shift band", base.horizon)
    logger.debug("coupled run: %d shifts, %d hat events", K, sum(s.hat_count for s in shifts))
    return CoupledRun(base, shifts, grid, intensity, consistent)


def lambda_hatM_integral(
    base: HawkesPath,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    K: int,
    rng: RandomState,
) -> float:
    """固定基础路径, 用 K 点梯形求积估计 ∫₀ᵀ λ_t M̂ᵗ_T dt."""
    return coupled_run(base, kernel, mu, marks, K, rng).lambda_hatM()


# ===================== 存储候选流版本 =====================


def shift_from_stream(
    stream: PoissonCandidateStream,
    base: HawkesPath,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    t: float,
) -> ShiftPath:
    """读取存储候选流中落入平移带 (λ_u, λ_u + λ̂ᵗ_u] 的点构造级联.

    Raises:
        DomainError: t ∉ [0, T] 时
    """
    T = base.horizon
    if not 0.0 <= t <= T:
        raise DomainError("t", t, f"requires 0 <= t <= T = {T}")
    times: list[float] = []
    values: list[float] = []
    pre: list[float] = []
    heights: list[float] = []
    after = stream.times > t
    for s, theta, mark in zip(stream.times[after], stream.thetas[after], stream.marks[after], strict=True):
        floor = intensity_at(base, kernel, mu, float(s))
        hat = float(kernel.phi(s - t))
        if times:
            hat += float(np.sum(kernel.phi(s - np.asarray(times))))
        if floor < theta <= floor + hat:
            times.append(float(s))
            values.append(float(mark))
            pre.append(hat)
            heights.append(float(theta))
    return _shift_result(
        kernel,
        marks,
        t,
        T,
        np.asarray(times, dtype=np.float64),
        np.asarray(values, dtype=np.float64),
        np.asarray(pre, dtype=np.float64),
        np.asarray(heights, dtype=np.float64),
    )


def resimulate_with_atom(
    stream: PoissonCandidateStream,
    kernel: Kernel,
    mu: float,
    t: float,
    x: float,
) -> HawkesPath:
    """在候选流上插入原子 (t, x) 后重新求解嵌入方程."""
    return solve_from_stream(stream, kernel, mu, extra_atom=(t, x))
