"""Stein 界估计测试.

测试:
- A₁,₁ 的精确值
- 零核 (Poisson) 情形下各项的精确值
- 总界的结构与可复现性
- 加权界与分段常数权重
"""

import math

import numpy as np
import pytest

from hawkes_stein import (
    BoundBudget,
    DomainError,
    ErlangKernel,
    ExponentialKernel,
    GaussianMarks,
    MarkDistribution,
    MarkKind,
    MarkMoments,
    RandomState,
    TwoPoint,
    WeightFunction,
    a12_proof_bound,
    a22_conditional,
    a22_conditional_bound,
    asymptotic_constants,
    estimate_a2,
    estimate_a11,
    estimate_a12,
    estimate_a13,
    expected_count,
    total_bound,
    weighted_bound,
)

SMALL = BoundBudget(n_outer=100, k_grid=4, workers=1)


class HeavyTailMarks(MarkDistribution):
    """E|Y|³ 无限的标记分布, 禁止抽样."""

    kind = MarkKind.EMPIRICAL
    moments = MarkMoments(0.0, 1.0, math.inf, 1.0, 0.0)

    def _compute_moments(self) -> MarkMoments:
        return self.moments

    def sample(self, generator, size=None):
        raise AssertionError("marks sampled before third-moment validation")


class TestWeightFunction:
    """分段常数权重测试."""

    def test_canonical(self) -> None:
        """测试 α_t ≡ 1/√T."""
        weight = WeightFunction.canonical(16.0)
        assert weight.horizon == 16.0
        assert weight(3.0) == pytest.approx(0.25)

    def test_segments(self) -> None:
        """测试左闭右开的分段, 最后一段包含 T."""
        weight = WeightFunction(breaks=[0.0, 1.0, 2.0], levels=[3.0, 5.0])
        np.testing.assert_allclose(weight(np.array([0.0, 0.999, 1.0, 2.0])), [3.0, 3.0, 5.0, 5.0])

    @pytest.mark.parametrize(
        ("breaks", "levels"),
        [
            ([0.0, 1.0], [1.0, 2.0]),
            ([0.5, 1.0], [1.0]),
            ([0.0, 1.0, 1.0], [1.0, 2.0]),
            ([0.0, 1.0], [math.nan]),
        ],
    )
    def test_invalid(self, breaks, levels) -> None:
        with pytest.raises(DomainError):
            WeightFunction(breaks=breaks, levels=levels)


class TestA11:
    """A₁,₁ 测试."""

    def test_zero_kernel(self, zero_kernel, two_point) -> None:
        """测试零核 A₁,₁ = 0."""
        assert estimate_a11(zero_kernel, 1.0, two_point, 50.0) == 0.0

    def test_exponential_closed_form(self, exp_kernel, point_one) -> None:
        """测试 A₁,₁ = (1 − e^{-T})/T."""
        assert estimate_a11(exp_kernel, 1.0, point_one, 100.0) == pytest.approx((1.0 - math.exp(-100.0)) / 100.0)

    def test_halves_when_T_doubles(self, exp_kernel, point_one) -> None:
        ratio = estimate_a11(exp_kernel, 1.0, point_one, 200.0) / estimate_a11(exp_kernel, 1.0, point_one, 100.0)
        assert ratio == pytest.approx(0.5, rel=0.01)

    def test_requires_positive_T(self, exp_kernel, point_one) -> None:
        with pytest.raises(DomainError):
            estimate_a11(exp_kernel, 1.0, point_one, 0.0)


class TestPoissonExactness:
    """零核情形测试."""

    def test_a12_vanishes(self, zero_kernel, rng) -> None:
        estimate, se = estimate_a12(zero_kernel, 1.0, 25.0, 100, rng, workers=1)
        assert estimate == 0.0
        assert se == 0.0

    def test_a13_vanishes(self, zero_kernel, two_point, rng) -> None:
        estimate, _ = estimate_a13(zero_kernel, 1.0, two_point, 25.0, 100, 4, rng, workers=1)
        assert estimate == 0.0

    def test_a2_terms(self, zero_kernel, two_point, rng) -> None:
        """测试 A₂,₁ = μT^{-1/2}, A₂,₂ = 0, A₂ = μE|Y|³/√T."""
        T = 25.0
        a2 = estimate_a2(zero_kernel, 1.0, two_point, T, 100, 4, rng, workers=1)
        assert a2.a21 == pytest.approx(1.0 / math.sqrt(T))
        assert a2.a22 == 0.0
        assert a2.direct == pytest.approx(two_point.abs3 / math.sqrt(T))

    @pytest.mark.parametrize(("mu", "T"), [(1.0, 25.0), (2.5, 100.0)])
    def test_total_is_exact(self, zero_kernel, two_point, rng, mu, T) -> None:
        """测试总界 = μE|Y|³/√T."""
        report = total_bound(zero_kernel, mu, two_point, T, SMALL, rng)
        assert report.a11 == report.a12 == report.a13 == report.a22 == 0.0
        assert report.total == pytest.approx(mu * two_point.abs3 / math.sqrt(T), rel=1e-12)
        assert report.scaled_total == pytest.approx(mu * two_point.abs3, rel=1e-12)

    def test_point_mass_total(self, zero_kernel, point_one, rng) -> None:
        """测试 ν = δ₁ 时总界为 1/√T."""
        report = total_bound(zero_kernel, 1.0, point_one, 64.0, SMALL, rng)
        assert report.total == pytest.approx(0.125, rel=1e-12)


class TestTotalBound:
    """总界测试."""

    @pytest.fixture
    def report(self, exp_kernel, two_point, rng):
        return total_bound(exp_kernel, 1.0, two_point, 10.0, SMALL, rng)

    def test_terms_nonnegative(self, report) -> None:
        """测试各项非负, 且总界不小于 A₁,₁."""
        for value in (report.a11, report.a12, report.a13, report.a21, report.a22, report.a2):
            assert value >= 0.0
        assert report.total >= report.a11
        assert all(math.isfinite(v) for v in (report.a12_se, report.a13_se, report.a22_se, report.total_se))

    def test_total_composition(self, report, two_point) -> None:
        """测试 total = A₁,₁ + ϑ²A₁,₂ + |m|A₁,₃ + A₂."""
        expected = report.a11 + two_point.theta2 * report.a12 + abs(two_point.m) * report.a13 + report.a2
        assert report.total == pytest.approx(expected, rel=1e-12)

    def test_split_form(self, report, two_point) -> None:
        """测试分拆形式 2(E|Y|³A₂,₁ + E|Y|A₂,₂)."""
        expected = 2.0 * (two_point.abs3 * report.a21 + two_point.moments.abs1 * report.a22)
        assert report.a2_split == pytest.approx(expected)

    def test_budget_recorded(self, report, rng) -> None:
        assert (report.n_outer, report.k_grid, report.seed) == (100, 4, rng.seed)

    def test_reproducible(self, exp_kernel, two_point, rng, report) -> None:
        again = total_bound(exp_kernel, 1.0, two_point, 10.0, SMALL, rng)
        assert again.total == report.total

    def test_parallel_matches_serial(self, exp_kernel, two_point, rng, report) -> None:
        """测试多进程结果与串行逐位相同."""
        parallel = total_bound(exp_kernel, 1.0, two_point, 10.0, BoundBudget(100, 4, workers=2), rng)
        assert parallel.total == report.total

    def test_minimum_replications(self, exp_kernel, two_point, rng) -> None:
        with pytest.raises(DomainError, match="n >= 100"):
            total_bound(exp_kernel, 1.0, two_point, 10.0, BoundBudget(50, 4, workers=1), rng)

    def test_infinite_third_moment_rejected_before_simulation(self, exp_kernel, rng) -> None:
        """测试 E|Y|³ 无限时在任何模拟之前报错."""
        with pytest.raises(DomainError, match="finite E"):
            estimate_a2(exp_kernel, 1.0, HeavyTailMarks(), 10.0, 100, 4, rng, workers=1)
        with pytest.raises(DomainError, match="finite E"):
            total_bound(exp_kernel, 1.0, HeavyTailMarks(), 10.0, SMALL, rng)

    def test_weight_requires_gamma2(self, exp_kernel, two_point, rng) -> None:
        with pytest.raises(DomainError, match="gamma2"):
            total_bound(exp_kernel, 1.0, two_point, 10.0, SMALL, rng, weight=WeightFunction.canonical(10.0))


class TestDiagnostics:
    """交叉检验量测试."""

    def test_a22_conditional_below_bound(self, exp_kernel) -> None:
        """测试 A₂,₂ 精确值不超过 ϑ²‖ψ‖₁E[H_T]/T^{3/2}."""
        marks = GaussianMarks(0.5, 1.0)
        for T in (5.0, 50.0):
            exact = a22_conditional(exp_kernel, 1.0, marks, T)
            assert 0.0 < exact <= a22_conditional_bound(exp_kernel, 1.0, marks, T)

    def test_a22_bound_value(self, exp_kernel, point_one) -> None:
        T = 25.0
        expected = 1.0 * expected_count(exp_kernel, 1.0, T) * T**-1.5
        assert a22_conditional_bound(exp_kernel, 1.0, point_one, T) == pytest.approx(expected)

    def test_zero_kernel_diagnostics(self, zero_kernel, point_one) -> None:
        assert a12_proof_bound(zero_kernel, 1.0, 10.0) == 0.0
        assert a22_conditional(zero_kernel, 1.0, point_one, 10.0) == 0.0

    def test_proof_bound_decays(self, exp_kernel) -> None:
        """测试 √T·(A₁,₂ 上界) 有界."""
        scaled = [a12_proof_bound(exp_kernel, 1.0, T) * math.sqrt(T) for T in (25.0, 100.0, 400.0)]
        assert max(scaled) / min(scaled) < 3.0


class TestWeightedBound:
    """加权界测试."""

    def test_canonical_weight_matches_a2(self, exp_kernel, two_point, rng) -> None:
        """测试权重 1/√T 时 B₂ 等于直接形式 A₂."""
        T = 10.0
        gamma2 = asymptotic_constants(exp_kernel, 1.0, two_point).limit_variance
        report = total_bound(
            exp_kernel, 1.0, two_point, T, SMALL, rng, weight=WeightFunction.canonical(T), gamma2=gamma2
        )
        assert report.weighted is not None
        assert report.weighted.b2 == pytest.approx(report.a2, rel=1e-9)
        assert report.weighted.total == pytest.approx(report.weighted.b1 + report.weighted.b2)

    def test_two_segment_weight(self, exp_kernel, rng) -> None:
        marks = TwoPoint(1.0, -1.0, 0.5)
        weight = WeightFunction(breaks=[0.0, 5.0, 10.0], levels=[0.2, 0.4])
        report = weighted_bound(exp_kernel, 1.0, marks, 10.0, weight, 1.0, 100, 4, rng, workers=1)
        assert report.b1 >= 0.0
        assert report.b2 > 0.0
        assert report.n_outer == 100

    def test_rejects_nonpositive_gamma2(self, exp_kernel, point_one, rng) -> None:
        with pytest.raises(DomainError, match="gamma2 > 0"):
            weighted_bound(exp_kernel, 1.0, point_one, 10.0, WeightFunction.canonical(10.0), 0.0, 100, 4, rng)

    def test_rejects_mismatched_horizon(self, exp_kernel, point_one, rng) -> None:
        with pytest.raises(DomainError, match="end at T"):
            weighted_bound(exp_kernel, 1.0, point_one, 10.0, WeightFunction.canonical(5.0), 1.0, 100, 4, rng)


@pytest.mark.slow
class TestBoundScaling:
    """界的衰减与预算一致性测试."""

    def test_stderr_halves_when_budget_quadruples(self, exp_kernel) -> None:
        """测试 n 变为 4 倍时标准误减半 (±20%)."""
        _, se_small = estimate_a12(exp_kernel, 1.0, 25.0, 500, RandomState(1), workers=1)
        _, se_large = estimate_a12(exp_kernel, 1.0, 25.0, 2000, RandomState(1), workers=1)
        assert se_large / se_small == pytest.approx(0.5, rel=0.2)

    def test_scaled_total_bounded(self, exp_kernel, point_one) -> None:
        """测试 √T·total 在 T 网格上不发散."""
        budget = BoundBudget(n_outer=300, k_grid=16)
        scaled = [
            total_bound(exp_kernel, 1.0, point_one, T, budget, RandomState(9)).scaled_total for T in (25.0, 50.0, 100.0)
        ]
        assert max(scaled) / min(scaled) < 3.0

    @pytest.mark.parametrize("kernel", [ExponentialKernel(1.0, 2.0), ErlangKernel(1.0, 2.0)])
    def test_each_term_decays_like_inverse_sqrt(self, kernel, point_one) -> None:
        """测试 √T·Â₁,₂, √T·Â₁,₃, √T·Â₂,₂ 在 T 网格上的 max/min ≤ 3."""
        budget = BoundBudget(n_outer=300, k_grid=16)
        grid = (25.0, 50.0, 100.0, 200.0, 400.0)
        reports = [total_bound(kernel, 1.0, point_one, T, budget, RandomState(21)) for T in grid]
        for name in ("a12", "a13", "a22"):
            scaled = [getattr(r, name) * math.sqrt(r.T) for r in reports]
            assert min(scaled) > 0.0, name
            assert max(scaled) / min(scaled) <= 3.0, name
