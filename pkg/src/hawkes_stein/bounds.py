"""Stein 界估计模块.

对 F_T = (X_T − m∫λ)/√T 估计 Wasserstein 界的各项:

  A₁,₁ = |σ²ϑ² − (ϑ²/T)E[H_T]|                    (精确)
  A₁,₂ = (1/T)E|∫₀ᵀ(λ_t − E[λ_t])dt|              (MC)
  A₁,₃ = (1/T)E|∫₀ᵀ λ_t M̂ᵗ_T dt|                  (嵌套 MC)
  A₂,₁ = T^{-3/2}E[H_T]                            (精确)
  A₂,₂ = T^{-3/2}E∫₀ᵀ λ_t |M̂ᵗ_T|² dt              (嵌套 MC)

第二项的直接形式 A₂ = T^{-3/2}E∫λ_t ∫|x|(x + M̂ᵗ_T)²ν(dx)dt 逐路径非负,
用于总界; 证明中的分拆形式 2(E|Y|³A₂,₁ + E|Y|A₂,₂) 作为对照一并报告.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np
from scipy.integrate import quad, trapezoid

from .coupling import DEFAULT_K_GRID, coupled_run, shift_grid
from .exceptions import DomainError
from .kernels import ZeroKernel, psi_l1
from .marks import PointMassOne
from .moments import asymptotic_constants, expected_count, expected_intensity
from .parallel import replicate
from .rng import RandomState
from .simulation import compensator, simulate_hawkes

if TYPE_CHECKING:
    from .kernels import Kernel
    from .marks import MarkDistribution
    from .types import ArrayLike, FloatArray

logger = logging.getLogger(__name__)

# 外层重复次数下限
MIN_REPLICATIONS = 100

DEFAULT_N_OUTER = 5000


# ===================== 权重函数 =====================


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """[0, T] 上的分段常数确定性权重 α_t.

    第 k 段为 [breaks[k], breaks[k+1]), 最后一段包含 T.

    Attributes:
        breaks: 严格递增的分段点, 首项为 0, 末项为 T
        levels: 各段上的取值
    """

    breaks: FloatArray
    levels: FloatArray

    def __post_init__(self) -> None:
        """校验分段."""
        breaks = np.asarray(self.breaks, dtype=np.float64)
        levels = np.asarray(self.levels, dtype=np.float64)
        if breaks.ndim != 1 or breaks.size < 2 or levels.shape != (breaks.size - 1,):
            raise DomainError("weight", levels.shape, "requires len(levels) == len(breaks) - 1 >= 1")
        if breaks[0] != 0.0 or np.any(np.diff(breaks) <= 0):
            raise DomainError("weight.breaks", breaks.tolist(), "requires 0 = b_0 < b_1 < ... < b_K = T")
        if not (np.all(np.isfinite(breaks)) and np.all(np.isfinite(levels))):
            raise DomainError("weight", levels.tolist(), "requires finite breaks and levels")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def canonical(cls, T: float) -> WeightFunction:
        """常数权重 1/√T, 对应 F_T."""
        return cls(np.array([0.0, T]), np.array([1.0 / math.sqrt(T)]))

    @property
    def horizon(self) -> float:
        """T."""
        return float(self.breaks[-1])

    def __call__(self, t: ArrayLike) -> Any:
        """α_t."""
        x = np.asarray(t, dtype=np.float64)
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, self.levels.size - 1)
        out = self.levels[idx]
        return float(out) if np.ndim(t) == 0 else out


# ===================== 报告 =====================


class A2Estimate(NamedTuple):
    """第二项的估计.

    Attributes:
        a21: T^{-3/2}E[H_T] (精确)
        a22: A₂,₂ 的 MC 估计
        a22_se: a22 的标准误
        direct: 直接形式 A₂ 的 MC 估计
        direct_se: direct 的标准误
    """

    a21: float
    a22: float
    a22_se: float
    direct: float
    direct_se: float


@dataclass(frozen=True)
class WeightedBoundReport:
    """确定性权重下两项界的估计.

    Attributes:
        T: 时间范围
        gamma2: 目标方差 γ²
        b1: E|γ² − ∫α_t λ_t ∫x D F ν(dx) dt|
        b1_se: b1 的标准误
        b2: E∫|α_t| λ_t ∫|x| |D F|² ν(dx) dt
        b2_se: b2 的标准误
        total: b1 + b2
        total_se: total 的标准误
        n_outer: 外层重复次数
        k_grid: 平移网格点数
    """

    T: float
    gamma2: float
    b1: float
    b1_se: float
    b2: float
    b2_se: float
    total: float
    total_se: float
    n_outer: int
    k_grid: int


@dataclass(frozen=True)
class BoundReport:
    """F_T 的 Stein 界各项.

    Attributes:
        T: 时间范围
        a11: A₁,₁ (精确)
        a12: A₁,₂ 估计
        a12_se: 标准误
        a13: A₁,₃ 估计
        a13_se: 标准误
        a21: A₂,₁ (精确)
        a22: A₂,₂ 估计
        a22_se: 标准误
        total: A₁,₁ + ϑ²A₁,₂ + |m|A₁,₃ + A₂
        n_outer: 外层重复次数
        k_grid: 平移网格点数
        seed: 主种子
        a2: 直接形式的 A₂ 估计
        a2_se: 标准误
        a2_split: 2(E|Y|³A₂,₁ + E|Y|A₂,₂)
        total_se: total 的标准误(逐路径合并)
        a13_bias: 内层噪声对 E|·| 的上偏尺度
        a12_proof_bound: (1/T)∫ψ(T−s)E[H_s]^{1/2}ds
        a22_conditional: ϑ²T^{-3/2}∫E[λ_t]Ψ(T−t)dt (对 A₂,₂ 的精确值)
        a22_bound: ϑ²‖Φ‖₁(1+‖ψ‖₁)E[H_T]/T^{3/2}
        weighted: 提供权重时的加权界
    """

    T: float
    a11: float
    a12: float
    a12_se: float
    a13: float
    a13_se: float
    a21: float
    a22: float
    a22_se: float
    total: float
    n_outer: int
    k_grid: int
    seed: int
    a2: float = 0.0
    a2_se: float = 0.0
    a2_split: float = 0.0
    total_se: float = 0.0
    a13_bias: float = 0.0
    a12_proof_bound: float = 0.0
    a22_conditional: float = 0.0
    a22_bound: float = 0.0
    weighted: WeightedBoundReport | None = None

    @property
    def scaled_total(self) -> float:
        """total·√T."""
        return self.total * math.sqrt(self.T)


@dataclass(frozen=True)
class BoundBudget:
    """MC 预算.

    Attributes:
        n_outer: 外层重复次数
        k_grid: 平移网格点数
        workers: 进程数, None 表示机器并行度
        window: 稀疏化上界刷新窗口
    """

    n_outer: int = DEFAULT_N_OUTER
    k_grid: int = DEFAULT_K_GRID
    workers: int | None = None
    window: float | None = None


# ===================== 逐路径样本 =====================


class _Sample(NamedTuple):
    a12: float
    lambda_hatM: float
    a22: float
    a2: float
    inner_var: float
    b1: float
    b2: float


def _mean_se(values: FloatArray) -> tuple[float, float]:
    n = values.size
    mean = float(values.mean())
    if n < 2:
        return mean, math.inf
    return mean, float(values.std(ddof=1) / math.sqrt(n))


def _check_budget(T: float, n: int) -> None:
    if not T > 0:
        raise DomainError("T", T, "requires T > 0")
    if n < MIN_REPLICATIONS:
        raise DomainError("n", n, f"requires n >= {MIN_REPLICATIONS}")


def _check_third_moment(marks: MarkDistribution) -> None:
    if not math.isfinite(marks.abs3):
        raise DomainError("marks", marks.name, "requires finite E|Y|^3")


def _a12_replication(
    r: int,
    *,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    mean_count: float,
    rng: RandomState,
    window: float | None,
) -> float:
    path = simulate_hawkes(kernel, mu, marks, T, rng.for_replication(r), window=window)
    return abs(compensator(path, kernel, mu) - mean_count) / T


def _bound_replication(
    r: int,
    *,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    K: int,
    mean_count: float,
    rng: RandomState,
    window: float | None,
    weight: WeightFunction | None,
    gamma2: float,
) -> _Sample:
    """一条基础路径及其 K 个平移的全部逐路径量."""
    stream = rng.for_replication(r)
    base = simulate_hawkes(kernel, mu, marks, T, stream, window=window)
    run = coupled_run(base, kernel, mu, marks, K, stream, window=window)
    lam = run.base_intensity
    hat = run.terminal_martingales
    moments = marks.moments
    scale = T**-1.5

    # 梯形权重, 用于内层噪声方差
    quad_weights = np.full(K, run.grid[1] - run.grid[0])
    quad_weights[[0, -1]] *= 0.5
    inner_var = moments.theta2 * float(np.sum((quad_weights * lam) ** 2 * kernel.psi_integral(T - run.grid)))

    integrand = lam * (moments.abs3 + 2.0 * moments.signed2 * hat + moments.abs1 * hat * hat)
    b1 = b2 = 0.0
    if weight is not None:
        w = weight(run.grid)
        hat_w = np.array([s.weighted_martingale(kernel, moments.m, weight) for s in run.shifts])
        edges = [compensator(base, kernel, mu, b) for b in weight.breaks]
        drift = moments.theta2 * float(np.dot(weight.levels**2, np.diff(edges)))
        b1 = abs(gamma2 - drift - moments.m * float(trapezoid(w * lam * hat_w, run.grid)))
        spread = moments.abs3 * w * w + 2.0 * moments.signed2 * w * hat_w + moments.abs1 * hat_w**2
        weighted = np.abs(w) * lam * spread
        b2 = float(trapezoid(weighted, run.grid))
    return _Sample(
        a12=abs(compensator(base, kernel, mu) - mean_count) / T,
        lambda_hatM=run.lambda_hatM(),
        a22=scale * float(trapezoid(lam * hat * hat, run.grid)),
        a2=scale * float(trapezoid(integrand, run.grid)),
        inner_var=inner_var,
        b1=b1,
        b2=b2,
    )


def sample_bound_terms(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    n: int,
    K: int,
    rng: RandomState,
    *,
    workers: int | None = None,
    window: float | None = None,
    weight: WeightFunction | None = None,
    gamma2: float = 0.0,
) -> list[_Sample]:
    """对 n 条基础路径做嵌套模拟, 返回逐路径量."""
    _check_budget(T, n)
    shift_grid(T, K)
    fn = partial(
        _bound_replication,
        kernel=kernel,
        mu=mu,
        marks=marks,
        T=T,
        K=K,
        mean_count=float(expected_count(kernel, mu, T)),
        rng=rng,
        window=window,
        weight=weight,
        gamma2=gamma2,
    )
    return replicate(fn, n, workers)


# ===================== 各项估计 =====================


def estimate_a11(kernel: Kernel, mu: float, marks: MarkDistribution, T: float) -> float:
    """A₁,₁ = |σ²ϑ² − (ϑ²/T)E[H_T]|, 不含 MC."""
    if not T > 0:
        raise DomainError("T", T, "requires T > 0")
    constants = asymptotic_constants(kernel, mu, marks)
    return abs(constants.limit_variance - marks.theta2 * float(expected_count(kernel, mu, T)) / T)


def estimate_a12(
    kernel: Kernel,
    mu: float,
    T: float,
    n: int,
    rng: RandomState | None = None,
    *,
    workers: int | None = None,
    window: float | None = None,
) -> tuple[float, float]:
    """A₁,₂ 的 MC 估计.

    Args:
        kernel: 激励核
        mu: 基础强度
        T: 时间范围
        n: 路径数
        rng: 随机流, 默认为 RandomState(0)
        workers: 进程数
        window: 稀疏化上界刷新窗口

    Returns:
        (估计值, 标准误)
    """
    _check_budget(T, n)
    fn = partial(
        _a12_replication,
        kernel=kernel,
        mu=mu,
        marks=PointMassOne(),
        T=T,
        mean_count=float(expected_count(kernel, mu, T)),
        rng=rng if rng is not None else RandomState(0),
        window=window,
    )
    return _mean_se(np.asarray(replicate(fn, n, workers), dtype=np.float64))


def estimate_a13(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    n: int,
    K: int,
    rng: RandomState,
    *,
    workers: int | None = None,
    window: float | None = None,
) -> tuple[float, float]:
    """A₁,₃: n 条基础路径上 |lambda_hatM_integral|/T 的平均."""
    samples = sample_bound_terms(kernel, mu, marks, T, n, K, rng, workers=workers, window=window)
    return _mean_se(np.abs([s.lambda_hatM for s in samples]) / T)


def estimate_a2(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    n: int,
    K: int,
    rng: RandomState,
    *,
    workers: int | None = None,
    window: float | None = None,
) -> A2Estimate:
    """A₂,₁ (精确) 与 A₂,₂, 以及直接形式 A₂ 的嵌套 MC 估计."""
    _check_third_moment(marks)
    samples = sample_bound_terms(kernel, mu, marks, T, n, K, rng, workers=workers, window=window)
    return _a2_from_samples(kernel, mu, marks, T, samples)


def _a2_from_samples(
    kernel: Kernel, mu: float, marks: MarkDistribution, T: float, samples: list[_Sample]
) -> A2Estimate:
    a21 = float(expected_count(kernel, mu, T)) * T**-1.5
    a22, a22_se = _mean_se(np.array([s.a22 for s in samples]))
    direct, direct_se = _mean_se(np.array([s.a2 for s in samples]))
    return A2Estimate(a21, a22, a22_se, direct, direct_se)


def a12_proof_bound(kernel: Kernel, mu: float, T: float) -> float:
    """(1/T)∫₀ᵀ ψ(T−s)E[H_s]^{1/2} ds, 证明中对 A₁,₂ 的上界."""
    if isinstance(kernel, ZeroKernel):
        return 0.0

    def integrand(s: float) -> float:
        return float(kernel.psi(T - s)) * math.sqrt(float(expected_count(kernel, mu, s)))

    value, _ = quad(integrand, 0.0, T, limit=200)
    return value / T


def a22_conditional(kernel: Kernel, mu: float, marks: MarkDistribution, T: float) -> float:
    """A₂,₂ 的精确值 ϑ²T^{-3/2}∫₀ᵀ E[λ_t]Ψ(T−t)dt.

    由 E[|M̂ᵗ_T|² | F_t] = ϑ²∫ₜᵀ E_t[λ̂ᵗ_s]ds = ϑ²Ψ(T−t) 得到.
    """
    if isinstance(kernel, ZeroKernel):
        return 0.0

    def integrand(t: float) -> float:
        return float(expected_intensity(kernel, mu, t)) * float(kernel.psi_integral(T - t))

    value, _ = quad(integrand, 0.0, T, limit=200)
    return marks.theta2 * value * T**-1.5


def a22_conditional_bound(kernel: Kernel, mu: float, marks: MarkDistribution, T: float) -> float:
    """ϑ²‖Φ‖₁(1+‖ψ‖₁)E[H_T]/T^{3/2}."""
    return marks.theta2 * psi_l1(kernel) * float(expected_count(kernel, mu, T)) * T**-1.5


def weighted_bound(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    weight: WeightFunction,
    gamma2: float,
    n: int,
    K: int,
    rng: RandomState,
    *,
    workers: int | None = None,
    window: float | None = None,
) -> WeightedBoundReport:
    """确定性权重 α_t 下的两项界.

    Raises:
        DomainError: γ² ≤ 0 或权重区间与 [0, T] 不一致时
    """
    samples = _weighted_samples(kernel, mu, marks, T, weight, gamma2, n, K, rng, workers, window)
    return _weighted_report(T, gamma2, n, K, samples)


def _weighted_samples(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    weight: WeightFunction,
    gamma2: float,
    n: int,
    K: int,
    rng: RandomState,
    workers: int | None,
    window: float | None,
) -> list[_Sample]:
    if not gamma2 > 0:
        raise DomainError("gamma2", gamma2, "requires gamma2 > 0")
    if not math.isclose(weight.horizon, T, rel_tol=1e-12):
        raise DomainError("weight", weight.horizon, f"requires the weight to end at T = {T}")
    return sample_bound_terms(
        kernel, mu, marks, T, n, K, rng, workers=workers, window=window, weight=weight, gamma2=gamma2
    )


def _weighted_report(T: float, gamma2: float, n: int, K: int, samples: list[_Sample]) -> WeightedBoundReport:
    b1, b1_se = _mean_se(np.array([s.b1 for s in samples]))
    b2, b2_se = _mean_se(np.array([s.b2 for s in samples]))
    total, total_se = _mean_se(np.array([s.b1 + s.b2 for s in samples]))
    return WeightedBoundReport(T, gamma2, b1, b1_se, b2, b2_se, total, total_se, n, K)


def total_bound(
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    budget: BoundBudget,
    rng: RandomState,
    *,
    weight: WeightFunction | None = None,
    gamma2: float | None = None,
) -> BoundReport:
    """汇总全部项.

    一次嵌套模拟同时提供 A₁,₂, A₁,₃, A₂,₂ 与直接形式 A₂.

    Args:
        kernel: 激励核
        mu: 基础强度
        marks: 标记分布
        T: 时间范围
        budget: MC 预算
        rng: 随机流
        weight: 可选的确定性权重
        gamma2: 使用权重时必须提供的 γ²

    Returns:
        BoundReport

    Raises:
        DomainError: 提供权重而未提供 γ² 时
            或标记分布的 E|Y|³ 不有限时
    """
    if weight is not None and gamma2 is None:
        raise DomainError("gamma2", gamma2, "must be supplied together with a weight function")
    _check_third_moment(marks)
    n, K = budget.n_outer, budget.k_grid
    moments = marks.moments
    if weight is not None:
        assert gamma2 is not None
        samples = _weighted_samples(kernel, mu, marks, T, weight, gamma2, n, K, rng, budget.workers, budget.window)
    else:
        samples = sample_bound_terms(kernel, mu, marks, T, n, K, rng, workers=budget.workers, window=budget.window)

    a11 = estimate_a11(kernel, mu, marks, T)
    a12_values = np.array([s.a12 for s in samples])
    a13_values = np.abs([s.lambda_hatM for s in samples]) / T
    a12, a12_se = _mean_se(a12_values)
    a13, a13_se = _mean_se(a13_values)
    a2 = _a2_from_samples(kernel, mu, marks, T, samples)
    per_path = moments.theta2 * a12_values + abs(moments.m) * a13_values + np.array([s.a2 for s in samples])
    rest, total_se = _mean_se(per_path)
    a13_bias = float(np.mean(np.sqrt([s.inner_var for s in samples]))) / T

    report = BoundReport(
        T=T,
        a11=a11,
        a12=a12,
        a12_se=a12_se,
        a13=a13,
        a13_se=a13_se,
        a21=a2.a21,
        a22=a2.a22,
        a22_se=a2.a22_se,
        total=a11 + rest,
        n_outer=n,
        k_grid=K,
        seed=rng.seed,
        a2=a2.direct,
        a2_se=a2.direct_se,
        a2_split=2.0 * (moments.abs3 * a2.a21 + moments.abs1 * a2.a22),
        total_se=total_se,
        a13_bias=a13_bias,
        a12_proof_bound=a12_proof_bound(kernel, mu, T),
        a22_conditional=a22_conditional(kernel, mu, marks, T),
        a22_bound=a22_conditional_bound(kernel, mu, marks, T),
        weighted=_weighted_report(T, gamma2, n, K, samples) if weight is not None and gamma2 is not None else None,
    )
    if abs(moments.m) > 0 and a13_bias > 0.5 * a13:
        logger.info("T=%g: inner-noise scale %.3g is comparable to A13 estimate %.3g", T, a13_bias, a13)
    logger.info("T=%g: total bound %.6g (sqrt(T)*total = %.4g)", T, report.total, report.scaled_total)
    return report
