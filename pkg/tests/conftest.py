"""pytest 配置和共享测试夹具.

Fixtures:
    exp_kernel: 指数核 α=1, β=2
    erlang_kernel: Erlang 核 α=1, β=2
    zero_kernel: 零核
    point_one: 单位点质量标记
    two_point: 取值 ±1 的两点分布
    rng: 固定种子的随机流
"""

import pytest

from hawkes_stein import (
    ErlangKernel,
    ExponentialKernel,
    PointMassOne,
    RandomState,
    TwoPoint,
    ZeroKernel,
)


@pytest.fixture
def exp_kernel() -> ExponentialKernel:
    """指数核 Φ(t) = e^{-2t}, ‖Φ‖₁ = 1/2."""
    return ExponentialKernel(1.0, 2.0)


@pytest.fixture
def erlang_kernel() -> ErlangKernel:
    """Erlang 核 Φ(t) = t e^{-2t}, ‖Φ‖₁ = 1/4."""
    return ErlangKernel(1.0, 2.0)


@pytest.fixture
def zero_kernel() -> ZeroKernel:
    """零核."""
    return ZeroKernel()


@pytest.fixture
def point_one() -> PointMassOne:
    """ν = δ₁."""
    return PointMassOne()


@pytest.fixture
def two_point() -> TwoPoint:
    """P(Y = 2) = 1/4, P(Y = -1) = 3/4."""
    return TwoPoint(2.0, -1.0, 0.25)


@pytest.fixture
def rng() -> RandomState:
    """固定种子的随机流."""
    return RandomState(20240601)


# 标记定义
def pytest_configure(config) -> None:
    """配置 pytest 标记."""
    config.addinivalue_line(
        "markers",
        "integration: 集成测试标记",
    )
    config.addinivalue_line(
        "markers",
        "slow: 慢速统计检验标记",
    )
