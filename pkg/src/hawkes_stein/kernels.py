"""激励核模块.

定义激励核 Φ 及其预解核 ψ = Σ_{n≥1} Φ^{(*n)}.
指数核与 Erlang 核使用闭式表达, 列表核在均匀网格上用 Picard 迭代求解
更新方程 ψ = Φ + Φ∗ψ.

主要类:
  - Kernel: 核函数抽象基类
  - ExponentialKernel: Φ(t) = α e^{-βt}
  - ErlangKernel: Φ(t) = α t e^{-βt}
  - ZeroKernel: Φ ≡ 0
  - TabulatedKernel: 分段线性列表核
"""

from __future__ import annotations

import hashlib
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.signal import fftconvolve

from .exceptions import ConstructionError, DomainError, StabilityError
from .types import FloatArray, KernelKind

if TYPE_CHECKING:
    from collections.abc import Callable
    from pathlib import Path

    from .types import ArrayLike

logger = logging.getLogger(__name__)

# Picard 迭代停止阈值(相邻迭代的 sup 范数差)
PICARD_TOLERANCE = 1e-9
PICARD_MAX_ITERATIONS = 100_000

# 预解核的一项 c·e^{-r t}
ResolventTerm = tuple[float, float]


def _as_array(t: ArrayLike) -> FloatArray:
    return np.asarray(t, dtype=np.float64)


def _scalar_or_array(values: FloatArray, like: ArrayLike) -> Any:
    if np.ndim(like) == 0:
        return float(values)
    return values


class Kernel(ABC):
    """激励核抽象基类.

    子类在构造时校验稳定性条件, 因此任何构造成功的核都满足 ‖Φ‖₁ < 1.
    所有求值方法都接受标量或数组, 并假定 t ≥ 0 (定义域检查由模块级函数负责).
    """

    kind: ClassVar[KernelKind]

    @property
    def name(self) -> str:
        """核名称(与配置文件中的写法一致)."""
        return self.kind.value

    @abstractmethod
    def phi(self, t: ArrayLike) -> Any:
        """Φ(t)."""

    @abstractmethod
    def integral(self, u: ArrayLike) -> Any:
        """∫₀ᵘ Φ(s) ds, u ≤ 0 时为 0."""

    @abstractmethod
    def l1_norm(self) -> float:
        """‖Φ‖₁."""

    @abstractmethod
    def sup_on(self, a: float, b: float) -> float:
        """Φ 在 [a, b] 上的上确界(a < 0 的部分视为 0)."""

    def resolvent_terms(self) -> tuple[ResolventTerm, ...] | None:
        """以指数和 Σ c·e^{-r t} 表示的预解核.

        Returns:
            (c, r) 元组序列; 无闭式时返回 None
        """
        return None

    def psi(self, t: ArrayLike) -> Any:
        """预解核 ψ(t)."""
        terms = self.resolvent_terms()
        assert terms is not None
        x = _as_array(t)
        out = np.zeros_like(x)
        for c, r in terms:
            out = out + c * np.exp(-r * x)
        return _scalar_or_array(out, t)

    def psi_integral(self, t: ArrayLike) -> Any:
        """Ψ(t) = ∫₀ᵗ ψ(s) ds."""
        terms = self.resolvent_terms()
        assert terms is not None
        x = _as_array(t)
        out = np.zeros_like(x)
        for c, r in terms:
            out = out + (c / r) * -np.expm1(-r * x)
        return _scalar_or_array(out, t)

    def psi_double_integral(self, t: ArrayLike) -> Any:
        """∫₀ᵗ Ψ(u) du = ∫₀ᵗ ψ(t−s) s ds."""
        terms = self.resolvent_terms()
        assert terms is not None
        x = _as_array(t)
        out = np.zeros_like(x)
        for c, r in terms:
            out = out + (c / r) * (x + np.expm1(-r * x) / r)
        return _scalar_or_array(out, t)

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {"kernel": self.name}


@dataclass(frozen=True)
class ExponentialKernel(Kernel):
    """指数核 Φ(t) = α e^{-βt}.

    Attributes:
        alpha: 幅度 α
        beta: 衰减率 β

    Examples:
        >>> k = ExponentialKernel(1.0, 2.0)
        >>> k.l1_norm()
        0.5
    """

    alpha: float
    beta: float
    kind: ClassVar[KernelKind] = KernelKind.EXPONENTIAL

    def __post_init__(self) -> None:
        """校验 0 < α < β."""
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)) or self.alpha <= 0 or self.beta <= 0:
            raise StabilityError(self.name, "requires finite alpha > 0 and beta > 0")
        if self.alpha >= self.beta:
            raise StabilityError(self.name, "requires alpha < beta", self.alpha / self.beta)

    def phi(self, t: ArrayLike) -> Any:
        """Φ(t) = α e^{-βt}."""
        x = _as_array(t)
        return _scalar_or_array(self.alpha * np.exp(-self.beta * x), t)

    def integral(self, u: ArrayLike) -> Any:
        """(α/β)(1 − e^{-βu})."""
        x = np.maximum(_as_array(u), 0.0)
        return _scalar_or_array((self.alpha / self.beta) * -np.expm1(-self.beta * x), u)

    def l1_norm(self) -> float:
        """α/β."""
        return self.alpha / self.beta

    def sup_on(self, a: float, b: float) -> float:
        """单调递减, 上确界在左端点."""
        if b < 0:
            return 0.0
        return float(self.alpha * math.exp(-self.beta * max(a, 0.0)))

    def resolvent_terms(self) -> tuple[ResolventTerm, ...]:
        """ψ(t) = α e^{-(β−α)t}."""
        return ((self.alpha, self.beta - self.alpha),)

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {"kernel": self.name, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class ErlangKernel(Kernel):
    """Erlang 核 Φ(t) = α t e^{-βt}.

    峰值位于 t = 1/β. 预解核为
    ψ(t) = (√α/2)(e^{(√α−β)t} − e^{−(√α+β)t}).

    Attributes:
        alpha: 幅度 α
        beta: 衰减率 β
    """

    alpha: float
    beta: float
    kind: ClassVar[KernelKind] = KernelKind.ERLANG

    def __post_init__(self) -> None:
        """校验 0 < α < β²."""
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)) or self.alpha <= 0 or self.beta <= 0:
            raise StabilityError(self.name, "requires finite alpha > 0 and beta > 0")
        if self.alpha >= self.beta**2:
            raise StabilityError(self.name, "requires alpha < beta^2", self.alpha / self.beta**2)

    def phi(self, t: ArrayLike) -> Any:
        """Φ(t) = α t e^{-βt}."""
        x = _as_array(t)
        return _scalar_or_array(self.alpha * x * np.exp(-self.beta * x), t)

    def integral(self, u: ArrayLike) -> Any:
        """α[1/β² − e^{-βu}(u/β + 1/β²)]."""
        x = np.maximum(_as_array(u), 0.0)
        b = self.beta
        # 1 − e^{-βu}(1 + βu), 小 u 时避免相消
        core = -np.expm1(-b * x) - b * x * np.exp(-b * x)
        return _scalar_or_array(self.alpha * core / b**2, u)

    def l1_norm(self) -> float:
        """α/β²."""
        return self.alpha / self.beta**2

    def sup_on(self, a: float, b: float) -> float:
        """单峰函数, 峰值在 1/β."""
        if b < 0:
            return 0.0
        a = max(a, 0.0)
        peak = 1.0 / self.beta
        if b <= peak:
            return float(self.phi(b))
        if a >= peak:
            return float(self.phi(a))
        return float(self.phi(peak))

    def resolvent_terms(self) -> tuple[ResolventTerm, ...]:
        """两项指数和."""
        root = math.sqrt(self.alpha)
        return ((root / 2.0, self.beta - root), (-root / 2.0, self.beta + root))

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {"kernel": self.name, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class ZeroKernel(Kernel):
    """零核 Φ ≡ 0, 对应齐次 Poisson 过程."""

    kind: ClassVar[KernelKind] = KernelKind.ZERO

    def phi(self, t: ArrayLike) -> Any:
        """恒为 0."""
        return _scalar_or_array(np.zeros_like(_as_array(t)), t)

    def integral(self, u: ArrayLike) -> Any:
        """恒为 0."""
        return _scalar_or_array(np.zeros_like(_as_array(u)), u)

    def l1_norm(self) -> float:
        """0."""
        return 0.0

    def sup_on(self, a: float, b: float) -> float:
        """0."""
        return 0.0

    def resolvent_terms(self) -> tuple[ResolventTerm, ...]:
        """空和."""
        return ()


@dataclass(frozen=True)
class _ResolventGrid:
    """列表核预解核在均匀网格上的数值解."""

    times: FloatArray
    values: FloatArray
    cumulative: FloatArray
    double_cumulative: FloatArray
    iterations: int


@dataclass(frozen=True, eq=False)
class TabulatedKernel(Kernel):
    """分段线性列表核.

    网格点之间线性插值, 最后一个网格点之后恒为 0.
    ψ 在步长 psi_step, 长度 psi_horizon 的均匀网格上求解.

    Attributes:
        grid: 严格递增且从 0 开始的时间网格
        values: 网格上的非负核值
        psi_step: ψ 网格步长(默认取表格最小间距)
        psi_horizon: ψ 网格长度(默认为表格长度的 8 倍)
    """

    grid: FloatArray
    values: FloatArray
    psi_step: float | None = None
    psi_horizon: float | None = None
    kind: ClassVar[KernelKind] = KernelKind.TABULATED
    _cumulative: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """校验表格并检查 ‖Φ‖₁ < 1."""
        grid = np.asarray(self.grid, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ConstructionError("TabulatedKernel", "grid and values must be 1-D of equal length >= 2")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise ConstructionError("TabulatedKernel", "grid and values must be finite")
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise ConstructionError("TabulatedKernel", "grid must start at 0 and be strictly increasing")
        if np.any(values < 0):
            raise ConstructionError("TabulatedKernel", "values must be nonnegative")
        if self.psi_step is not None and self.psi_step <= 0:
            raise ConstructionError("TabulatedKernel", "psi_step must be positive")
        if self.psi_horizon is not None and self.psi_horizon <= grid[-1]:
            raise ConstructionError("TabulatedKernel", "psi_horizon must exceed the last grid point")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        segments = 0.5 * (values[1:] + values[:-1]) * np.diff(grid)
        object.__setattr__(self, "_cumulative", np.concatenate(([0.0], np.cumsum(segments))))
        l1 = float(self._cumulative[-1])
        if l1 >= 1.0:
            raise StabilityError(self.name, "requires ||phi||_1 < 1", l1)

    @classmethod
    def from_function(
        cls,
        func: Callable[[FloatArray], FloatArray],
        step: float,
        horizon: float,
        **kwargs: Any,
    ) -> TabulatedKernel:
        """在 [0, horizon] 的均匀网格上对函数取样构造列表核.

        Args:
            func: 向量化的核函数
            step: 网格步长
            horizon: 网格终点
            **kwargs: 传给构造函数的 ψ 求解参数

        Returns:
            列表核
        """
        n = round(horizon / step)
        grid = np.linspace(0.0, n * step, n + 1)
        return cls(grid=grid, values=np.asarray(func(grid), dtype=np.float64), **kwargs)

    @property
    def support_end(self) -> float:
        """最后一个网格点."""
        return float(self.grid[-1])

    def phi(self, t: ArrayLike) -> Any:
        """线性插值, 网格外为 0."""
        x = _as_array(t)
        return _scalar_or_array(np.interp(x, self.grid, self.values, right=0.0), t)

    def integral(self, u: ArrayLike) -> Any:
        """分段线性函数的精确积分."""
        x = np.clip(_as_array(u), 0.0, self.support_end)
        j = np.clip(np.searchsorted(self.grid, x, side="right") - 1, 0, self.grid.size - 2)
        d = x - self.grid[j]
        h = self.grid[j + 1] - self.grid[j]
        slope = (self.values[j + 1] - self.values[j]) / h
        out = self._cumulative[j] + self.values[j] * d + 0.5 * slope * d * d
        return _scalar_or_array(out, u)

    def l1_norm(self) -> float:
        """梯形求积(对分段线性函数精确)."""
        return float(self._cumulative[-1])

    def sup_on(self, a: float, b: float) -> float:
        """端点与区间内网格点取最大值."""
        lo, hi = max(a, 0.0), min(b, self.support_end)
        if hi < lo:
            return 0.0
        inside = self.values[(self.grid > lo) & (self.grid < hi)]
        candidates = [float(self.phi(lo)), float(self.phi(hi))]
        if inside.size:
            candidates.append(float(inside.max()))
        return max(candidates)

    @cached_property
    def resolvent_grid(self) -> _ResolventGrid:
        """Picard 迭代求解 ψ = Φ + Φ∗ψ (梯形卷积)."""
        step = self.psi_step if self.psi_step is not None else float(np.min(np.diff(self.grid)))
        horizon = self.psi_horizon if self.psi_horizon is not None else 8.0 * self.support_end
        n = int(math.ceil(horizon / step)) + 1
        times = np.arange(n, dtype=np.float64) * step
        phi = np.asarray(self.phi(times))
        psi = phi.copy()
        iterations = 0
        for iterations in range(1, PICARD_MAX_ITERATIONS + 1):
            updated = np.maximum(phi + trapezoid_convolution(phi, psi, step), 0.0)
            gap = float(np.max(np.abs(updated - psi)))
            psi = updated
            if gap < PICARD_TOLERANCE:
                break
        else:  # pragma: no cover
            logger.warning("Picard iteration for psi did not converge in %d steps", PICARD_MAX_ITERATIONS)
        logger.debug("psi solved on %d points (step=%g) in %d Picard iterations", n, step, iterations)
        tail = float(psi[-1])
        if tail > 1e-12 * max(float(psi.max()), 1.0):
            logger.warning("psi tail %.3g at horizon %.6g exceeds 1e-12; consider a larger psi_horizon", tail, horizon)
        cumulative = cumulative_trapezoid(psi, times, initial=0.0)
        double_cumulative = cumulative_trapezoid(cumulative, times, initial=0.0)
        return _ResolventGrid(times, psi, cumulative, double_cumulative, iterations)

    def psi(self, t: ArrayLike) -> Any:
        """网格解的线性插值, 网格外为 0."""
        rg = self.resolvent_grid
        return _scalar_or_array(np.interp(_as_array(t), rg.times, rg.values, right=0.0), t)

    def psi_integral(self, t: ArrayLike) -> Any:
        """Ψ(t), 网格外取终值."""
        rg = self.resolvent_grid
        return _scalar_or_array(np.interp(_as_array(t), rg.times, rg.cumulative), t)

    def psi_double_integral(self, t: ArrayLike) -> Any:
        """∫₀ᵗ Ψ, 网格外按 Ψ 终值线性外推."""
        rg = self.resolvent_grid
        x = _as_array(t)
        inner = np.interp(x, rg.times, rg.double_cumulative)
        beyond = np.maximum(x - rg.times[-1], 0.0) * rg.cumulative[-1]
        return _scalar_or_array(inner + beyond, t)

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {
            "kernel": self.name,
            "grid_points": int(self.grid.size),
            "support_end": self.support_end,
            "l1_norm": self.l1_norm(),
            "table_sha256": hashlib.sha256(np.concatenate([self.grid, self.values]).tobytes()).hexdigest(),
        }


def trapezoid_convolution(f: FloatArray, g: FloatArray, step: float) -> FloatArray:
    """均匀网格上的梯形卷积 (f∗g)(t_i) = ∫₀^{t_i} f(t_i − s) g(s) ds.

    Args:
        f: 网格上的 f 值
        g: 网格上的 g 值
        step: 网格步长

    Returns:
        与输入同长的卷积值, 首项为 0
    """
    full = fftconvolve(f, g)[: f.size]
    out = step * (full - 0.5 * f * g[0] - 0.5 * f[0] * g)
    out[0] = 0.0
    return out


def renewal_residual(kernel: Kernel, step: float, horizon: float) -> float:
    """更新方程在网格上的相对残差 max |ψ − Φ − Φ∗ψ| / (1 + ψ).

    Args:
        kernel: 核函数
        step: 网格步长
        horizon: 网格终点

    Returns:
        最大相对残差
    """
    times = np.arange(int(math.ceil(horizon / step)) + 1, dtype=np.float64) * step
    phi = np.asarray(kernel.phi(times))
    psi = np.asarray(kernel.psi(times))
    residual = np.abs(psi - phi - trapezoid_convolution(phi, psi, step))
    return float(np.max(residual / (1.0 + psi)))


def load_table(path: str | Path, **kwargs: Any) -> TabulatedKernel:
    """从 CSV 文件(表头 t,phi)读取列表核.

    Args:
        path: 文件路径
        **kwargs: 传给 TabulatedKernel 的 ψ 求解参数

    Returns:
        列表核

    Raises:
        ConstructionError: 文件内容无效时
    """
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise ConstructionError("TabulatedKernel", f"cannot read table '{path}': {e!s}") from e
    if table.shape[1] != 2:
        raise ConstructionError("TabulatedKernel", f"table '{path}' must have exactly two columns t,phi")
    return TabulatedKernel(grid=table[:, 0], values=table[:, 1], **kwargs)


def make_kernel(
    kind: KernelKind,
    *,
    alpha: float | None = None,
    beta: float | None = None,
    table_path: str | Path | None = None,
    psi_step: float | None = None,
    psi_horizon: float | None = None,
) -> Kernel:
    """按变体构造核函数.

    Args:
        kind: 核变体
        alpha: 幅度(指数/Erlang)
        beta: 衰减率(指数/Erlang)
        table_path: 列表核文件
        psi_step: 列表核 ψ 网格步长
        psi_horizon: 列表核 ψ 网格长度

    Returns:
        核函数

    Raises:
        ConstructionError: 缺少必需参数时
        StabilityError: 参数不满足稳定性条件时
    """
    if kind is KernelKind.ZERO:
        return ZeroKernel()
    if kind is KernelKind.TABULATED:
        if table_path is None:
            raise ConstructionError("TabulatedKernel", "table_path is required")
        return load_table(table_path, psi_step=psi_step, psi_horizon=psi_horizon)
    if alpha is None or beta is None:
        raise ConstructionError(kind.value, "alpha and beta are required")
    if kind is KernelKind.EXPONENTIAL:
        return ExponentialKernel(alpha, beta)
    return ErlangKernel(alpha, beta)


# ===================== 模块级操作 =====================


def _check_time(t: ArrayLike, argument: str = "t") -> None:
    if np.any(np.asarray(t) < 0) or np.any(np.isnan(np.asarray(t, dtype=np.float64))):
        raise DomainError(argument, t, "requires t >= 0")


def phi_eval(kernel: Kernel, t: ArrayLike) -> Any:
    """Φ(t).

    Raises:
        DomainError: t < 0 时
    """
    _check_time(t)
    return kernel.phi(t)


def phi_l1(kernel: Kernel) -> float:
    """‖Φ‖₁ ∈ [0, 1).

    Raises:
        StabilityError: ‖Φ‖₁ ≥ 1 时
    """
    norm = kernel.l1_norm()
    if not norm < 1.0:
        raise StabilityError(kernel.name, "requires ||phi||_1 < 1", norm)
    return norm


def psi_eval(kernel: Kernel, t: ArrayLike) -> Any:
    """ψ(t).

    Raises:
        DomainError: t < 0 时
    """
    _check_time(t)
    phi_l1(kernel)
    return kernel.psi(t)


def psi_l1(kernel: Kernel) -> float:
    """‖ψ‖₁ = ‖Φ‖₁ / (1 − ‖Φ‖₁)."""
    norm = phi_l1(kernel)
    return norm / (1.0 - norm)


def psi_integral(kernel: Kernel, t: ArrayLike) -> Any:
    """∫₀ᵗ ψ(s) ds.

    Raises:
        DomainError: t < 0 时
    """
    _check_time(t)
    return kernel.psi_integral(t)
