"""模拟与估计热点路径的性能测试.

测试:
- 稀疏化模拟 (指数核与 Erlang 核)
- 耦合平移网格
- 经验 W₁ 与 bootstrap
"""

import pytest

from hawkes_stein import (
    ErlangKernel,
    ExponentialKernel,
    PointMassOne,
    RandomState,
    TwoPoint,
    bootstrap_se,
    coupled_run,
    empirical_w1_to_gaussian,
    simulate_hawkes,
    simulate_hawkes_markov,
)

# ============================================================================
# 测试夹具
# ============================================================================


@pytest.fixture
def marks():
    return TwoPoint(2.0, -1.0, 0.25)


@pytest.fixture
def base_path(marks):
    """T = 100 的指数核基础路径."""
    return simulate_hawkes(ExponentialKernel(1.0, 2.0), 1.0, marks, 100.0, RandomState(1))


# ============================================================================
# 模拟性能测试
# ============================================================================


@pytest.mark.parametrize("kernel", [ExponentialKernel(1.0, 2.0), ErlangKernel(1.0, 2.0)], ids=["exp", "erlang"])
def test_simulate_hawkes_performance(benchmark, kernel, marks):
    """测试 T = 200 的稀疏化模拟."""
    path = benchmark(simulate_hawkes, kernel, 1.0, marks, 200.0, RandomState(2))
    assert path.count > 0


def test_simulate_markov_performance(benchmark):
    """测试指数核的精确 Markov 模拟."""
    path = benchmark(simulate_hawkes_markov, ExponentialKernel(1.0, 2.0), 1.0, PointMassOne(), 200.0, RandomState(3))
    assert path.count > 0


def test_coupled_run_performance(benchmark, base_path, marks):
    """测试 K = 64 的耦合平移网格."""
    run = benchmark(coupled_run, base_path, ExponentialKernel(1.0, 2.0), 1.0, marks, 64, RandomState(4))
    assert len(run.shifts) == 64


# ============================================================================
# 距离性能测试
# ============================================================================


def test_empirical_w1_performance(benchmark):
    """测试 n = 20000 的经验 W₁."""
    samples = RandomState(5).generator().standard_normal(20_000)
    assert benchmark(empirical_w1_to_gaussian, samples, 1.0) < 0.05


def test_bootstrap_performance(benchmark):
    """测试 n = 5000, 50 次重抽样的 bootstrap."""
    samples = RandomState(6).generator().standard_normal(5000)
    assert benchmark(bootstrap_se, samples, 1.0, 50, RandomState(7)) > 0.0
