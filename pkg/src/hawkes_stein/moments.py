"""矩计算模块.

一阶矩由更新公式 E[λ_t] = μ + μΨ(t), E[H_t] = μt + μ∫₀ᵗΨ 精确给出;
指数核与 Erlang 核的二阶矩由 Dynkin 生成元导出的线性 ODE 组求解.

Erlang 核的 Markov 状态为 (λ, ξ), 二阶矩向量 (E[λ²], E[λξ], E[ξ²])
满足 3×3 线性系统, 特征值为 −2β 与 −2β ± 2√α.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .exceptions import DomainError, UnsupportedKernelError
from .kernels import ErlangKernel, ExponentialKernel, Kernel, phi_l1

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .marks import MarkDistribution
    from .types import ArrayLike, FloatArray

logger = logging.getLogger(__name__)

ODE_METHOD = "DOP853"
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12


class AsymptoticConstants(NamedTuple):
    """极限常数.

    Attributes:
        sigma2: σ² = μ/(1−‖Φ‖₁)
        sigma2_tilde: σ̃² = μ/(1−‖Φ‖₁)³
        gamma: γ = 1/(1−‖Φ‖₁)
        limit_variance: σ²ϑ²
    """

    sigma2: float
    sigma2_tilde: float
    gamma: float
    limit_variance: float


@dataclass(frozen=True)
class MomentReport:
    """时刻 t 的矩.

    Attributes:
        t: 时间
        mean_intensity: E[λ_t]
        mean_count: E[H_t]
        second_moment_intensity: E[λ_t²] (仅 Markov 核)
        aux_mean: E[ξ_t] (仅 Erlang)
        cross_moment: E[λ_t ξ_t] (仅 Erlang)
        aux_second_moment: E[ξ_t²] (仅 Erlang)
    """

    t: float
    mean_intensity: float
    mean_count: float
    second_moment_intensity: float | None = None
    aux_mean: float | None = None
    cross_moment: float | None = None
    aux_second_moment: float | None = None

    @property
    def intensity_variance(self) -> float | None:
        """Var λ_t."""
        if self.second_moment_intensity is None:
            return None
        return self.second_moment_intensity - self.mean_intensity**2


def _check_times(t: ArrayLike) -> None:
    arr = np.asarray(t, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("t", t, "requires t >= 0")


def expected_intensity(kernel: Kernel, mu: float, t: ArrayLike) -> Any:
    """E[λ_t] = μ + μ∫₀ᵗ ψ."""
    _check_times(t)
    return mu + mu * kernel.psi_integral(t)


def expected_count(kernel: Kernel, mu: float, t: ArrayLike) -> Any:
    """E[H_t] = μt + μ∫₀ᵗ ψ(t−s) s ds.

    Raises:
        DomainError: t < 0 时
    """
    _check_times(t)
    x = np.asarray(t, dtype=np.float64)
    value = mu * x + mu * np.asarray(kernel.psi_double_integral(x))
    return float(value) if np.ndim(t) == 0 else value


def expected_aux(kernel: Kernel, mu: float, t: ArrayLike) -> Any:
    """Erlang 辅助过程均值 E[ξ_t] = μψ(t) + β(E[λ_t] − μ).

    Raises:
        UnsupportedKernelError: 非 Erlang 核时
    """
    if not isinstance(kernel, ErlangKernel):
        raise UnsupportedKernelError(kernel.name, "expected_aux")
    _check_times(t)
    return mu * kernel.psi(t) + kernel.beta * (expected_intensity(kernel, mu, t) - mu)


def asymptotic_constants(kernel: Kernel, mu: float, marks: MarkDistribution) -> AsymptoticConstants:
    """(σ², σ̃², γ, σ²ϑ²).

    Examples:
        >>> asymptotic_constants(ExponentialKernel(1.0, 2.0), 1.0, PointMassOne())
        AsymptoticConstants(sigma2=2.0, sigma2_tilde=8.0, gamma=2.0, limit_variance=2.0)
    """
    gamma = 1.0 / (1.0 - phi_l1(kernel))
    sigma2 = mu * gamma
    return AsymptoticConstants(sigma2, mu * gamma**3, gamma, sigma2 * marks.theta2)


# ===================== 二阶矩 ODE =====================


def erlang_second_moment_matrix(kernel: ErlangKernel) -> FloatArray:
    """(E[λ²], E[λξ], E[ξ²]) 的 3×3 系统矩阵."""
    a, b = kernel.alpha, kernel.beta
    return np.array(
        [
            [-2.0 * b, 2.0, 0.0],
            [a, -2.0 * b, 1.0],
            [0.0, 2.0 * a, -2.0 * b],
        ]
    )


def _linear_system(kernel: Kernel, mu: float) -> tuple[FloatArray, FloatArray, FloatArray]:
    """矩向量 y 满足 y' = Ay + c; 返回 (A, c, y₀).

    指数核: y = (E[λ], E[λ²]).
    Erlang 核: y = (E[λ], E[ξ], E[λ²], E[λξ], E[ξ²]).
    """
    if isinstance(kernel, ExponentialKernel):
        a, b = kernel.alpha, kernel.beta
        matrix = np.array([[a - b, 0.0], [2.0 * b * mu + a * a, 2.0 * (a - b)]])
        return matrix, np.array([b * mu, 0.0]), np.array([mu, mu * mu])
    if isinstance(kernel, ErlangKernel):
        a, b = kernel.alpha, kernel.beta
        matrix = np.zeros((5, 5))
        matrix[0, :2] = [-b, 1.0]
        matrix[1, :2] = [a, -b]
        matrix[2, 0] = 2.0 * b * mu
        matrix[3, 1] = b * mu
        matrix[4, 0] = a * a
        matrix[2:, 2:] = erlang_second_moment_matrix(kernel)
        return matrix, np.array([b * mu, 0.0, 0.0, 0.0, 0.0]), np.array([mu, 0.0, mu * mu, 0.0, 0.0])
    raise UnsupportedKernelError(kernel.name, "second_moment_ode")


def _report(kernel: Kernel, mu: float, t: float, state: FloatArray) -> MomentReport:
    count = float(expected_count(kernel, mu, t))
    if state.size == 2:
        return MomentReport(t, float(state[0]), count, float(state[1]))
    return MomentReport(t, float(state[0]), count, float(state[2]), float(state[1]), float(state[3]), float(state[4]))


def second_moment_ode(kernel: Kernel, mu: float, t_grid: Sequence[float] | FloatArray) -> list[MomentReport]:
    """沿时间网格积分二阶矩 ODE.

    Args:
        kernel: 指数核或 Erlang 核
        mu: 基础强度
        t_grid: 非负且严格递增的时间网格

    Returns:
        每个网格点一个 MomentReport

    Raises:
        UnsupportedKernelError: 核不可 Markov 表示时
        DomainError: 网格含负值或不严格递增时
    """
    matrix, drift, start = _linear_system(kernel, mu)
    grid = np.asarray(t_grid, dtype=np.float64)
    _check_times(grid)
    if grid.size == 0:
        return []
    if np.any(np.diff(grid) <= 0):
        raise DomainError("t_grid", t_grid, "requires a strictly increasing grid")
    end = float(grid[-1])
    if end == 0.0:
        return [_report(kernel, mu, 0.0, start) for _ in grid]
    solution = solve_ivp(
        lambda _t, y: matrix @ y + drift,
        (0.0, end),
        start,
        method=ODE_METHOD,
        t_eval=grid,
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
    )
    if not solution.success:  # pragma: no cover
        logger.warning("moment ODE integration reported: %s", solution.message)
    logger.debug("moment ODE solved on %d points with %d RHS evaluations", grid.size, solution.nfev)
    return [_report(kernel, mu, float(t), solution.y[:, i]) for i, t in enumerate(grid)]


def stationary_second_moment(kernel: Kernel, mu: float) -> MomentReport:
    """ODE 组的不动点 (t → ∞).

    返回报告的 t 为 inf, mean_count 为 inf.

    Examples:
        >>> stationary_second_moment(ExponentialKernel(1.0, 2.0), 1.0).second_moment_intensity
        5.0
    """
    matrix, drift, _ = _linear_system(kernel, mu)
    state = np.linalg.solve(matrix, -drift)
    if state.size == 2:
        return MomentReport(float("inf"), float(state[0]), float("inf"), float(state[1]))
    return MomentReport(
        float("inf"), float(state[0]), float("inf"), float(state[2]), float(state[1]), float(state[3]), float(state[4])
    )


def moment_series(kernel: Kernel, mu: float, t_grid: Sequence[float] | FloatArray) -> list[MomentReport]:
    """任意核的矩序列; Markov 核附带二阶矩."""
    if isinstance(kernel, ExponentialKernel | ErlangKernel):
        return second_moment_ode(kernel, mu, t_grid)
    grid = np.asarray(t_grid, dtype=np.float64)
    _check_times(grid)
    intensity = np.atleast_1d(expected_intensity(kernel, mu, grid))
    count = np.atleast_1d(expected_count(kernel, mu, grid))
    return [MomentReport(float(t), float(intensity[i]), float(count[i])) for i, t in enumerate(grid)]
