"""标记分布测试.

测试:
- 各变体的解析矩
- 抽样与矩的一致性
- 构造参数校验
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from hawkes_stein import (
    ConstructionError,
    Empirical,
    GaussianMarks,
    LognormalMarks,
    MarkKind,
    PointMassOne,
    RandomState,
    TwoPoint,
    make_marks,
    mark_moments,
    sample_mark,
)

N_DRAWS = 1_000_000


class TestMarkMoments:
    """解析矩测试."""

    def test_point_mass_one(self, point_one) -> None:
        """测试 δ₁ 的矩."""
        assert mark_moments(point_one) == (1.0, 1.0, 1.0)

    def test_symmetric_two_point(self) -> None:
        """测试对称两点分布 (0, 1, 1)."""
        m, theta2, abs3 = mark_moments(TwoPoint(-1.0, 1.0, 0.5))
        assert m == pytest.approx(0.0)
        assert theta2 == pytest.approx(1.0)
        assert abs3 == pytest.approx(1.0)

    def test_asymmetric_two_point(self, two_point) -> None:
        m, theta2, abs3 = mark_moments(two_point)
        assert m == pytest.approx(0.25 * 2.0 - 0.75)
        assert theta2 == pytest.approx(0.25 * 4.0 + 0.75)
        assert abs3 == pytest.approx(0.25 * 8.0 + 0.75)
        assert two_point.moments.abs1 == pytest.approx(1.25)
        assert two_point.moments.signed2 == pytest.approx(0.25 * 4.0 - 0.75)

    def test_standard_gaussian(self) -> None:
        """测试 E|Z|³ = 2√(2/π)."""
        m, theta2, abs3 = mark_moments(GaussianMarks(0.0, 1.0))
        assert m == 0.0
        assert theta2 == pytest.approx(1.0)
        assert abs3 == pytest.approx(math.sqrt(8.0 / math.pi))

    @pytest.mark.parametrize(("mean", "sd"), [(0.5, 1.0), (-1.2, 0.7), (2.0, 0.3)])
    def test_gaussian_absolute_moments_by_quadrature(self, mean, sd) -> None:
        """测试折叠正态绝对矩闭式."""
        dist = GaussianMarks(mean, sd)

        def moment(f):
            value, _ = quad(lambda x: f(x) * norm.pdf(x, mean, sd), -np.inf, np.inf)
            return value

        assert dist.abs3 == pytest.approx(moment(lambda x: abs(x) ** 3), rel=1e-7)
        assert dist.moments.abs1 == pytest.approx(moment(abs), rel=1e-7)
        assert dist.moments.signed2 == pytest.approx(moment(lambda x: x * abs(x)), abs=1e-9)

    def test_lognormal(self) -> None:
        """测试对数正态的矩."""
        dist = LognormalMarks(0.0, 0.5)
        assert dist.m == pytest.approx(math.exp(0.125))
        assert dist.theta2 == pytest.approx(math.exp(0.5))
        assert dist.abs3 == pytest.approx(math.exp(4.5 * 0.25))

    def test_empirical_sample_moments(self) -> None:
        """测试经验分布的样本矩."""
        dist = Empirical(np.array([1.0, -2.0, 3.0]))
        assert dist.m == pytest.approx(2.0 / 3.0)
        assert dist.theta2 == pytest.approx(14.0 / 3.0)
        assert dist.abs3 == pytest.approx(36.0 / 3.0)


class TestMarkValidation:
    """构造校验测试."""

    def test_two_point_rejects_zero_atom(self) -> None:
        with pytest.raises(ConstructionError, match="nonzero"):
            TwoPoint(0.0, 1.0, 0.5)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_two_point_probability(self, p) -> None:
        with pytest.raises(ConstructionError):
            TwoPoint(-1.0, 1.0, p)

    def test_gaussian_requires_positive_sd(self) -> None:
        with pytest.raises(ConstructionError):
            GaussianMarks(0.0, 0.0)

    def test_lognormal_requires_positive_logsd(self) -> None:
        with pytest.raises(ConstructionError):
            LognormalMarks(0.0, -1.0)

    @pytest.mark.parametrize("values", [[], [1.0, 0.0], [1.0, math.inf]])
    def test_empirical_rejects_bad_values(self, values) -> None:
        """测试空, 含 0 或非有限的取值."""
        with pytest.raises(ConstructionError):
            Empirical(np.asarray(values, dtype=np.float64))

    def test_make_marks_missing_parameter(self) -> None:
        with pytest.raises(ConstructionError, match="missing parameter"):
            make_marks(MarkKind.TWO_POINT, {"a": 1.0, "b": -1.0})

    def test_make_marks_builds_variant(self) -> None:
        dist = make_marks(MarkKind.GAUSSIAN, {"mean": 0.0, "sd": 2.0})
        assert isinstance(dist, GaussianMarks)
        assert dist.describe() == {"dist": "gaussian", "mean": 0.0, "sd": 2.0}


class TestSampleMark:
    """抽样测试."""

    def test_point_mass_always_one(self, point_one, rng) -> None:
        assert sample_mark(point_one, rng) == 1.0

    def test_same_stream_same_draw(self, rng) -> None:
        """测试同一随机流可复现."""
        dist = GaussianMarks(0.0, 1.0)
        assert sample_mark(dist, rng) == sample_mark(dist, rng)

    def test_generator_advances_between_draws(self, rng) -> None:
        """测试传入生成器时连续抽样推进, 首个值与随机流的单次抽样相同."""
        dist = GaussianMarks(0.0, 1.0)
        generator = rng.generator()
        draws = [sample_mark(dist, generator) for _ in range(3)]
        assert draws[0] == sample_mark(dist, rng)
        assert len(set(draws)) == 3

    def test_two_point_mean(self) -> None:
        """测试对称两点分布样本均值 0 ± 3·10⁻³."""
        draws = TwoPoint(-1.0, 1.0, 0.5).sample(RandomState(11).generator(), N_DRAWS)
        assert abs(draws.mean()) < 3e-3

    def test_gaussian_variance(self) -> None:
        """测试标准正态样本方差 1 ± 1%."""
        draws = GaussianMarks(0.0, 1.0).sample(RandomState(12).generator(), N_DRAWS)
        assert draws.var() == pytest.approx(1.0, rel=0.01)

    @pytest.mark.parametrize(
        "dist",
        [
            TwoPoint(2.0, -1.0, 0.25),
            GaussianMarks(0.5, 1.5),
            LognormalMarks(0.0, 0.4),
            Empirical(np.array([0.5, -1.0])),
        ],
    )
    def test_sample_moments_within_four_se(self, dist) -> None:
        """测试样本矩与缓存矩在 4 个标准误内一致."""
        draws = dist.sample(RandomState(13).generator(), N_DRAWS)
        for power, expected in ((1, dist.m), (2, dist.theta2)):
            values = draws**power
            se = values.std(ddof=1) / math.sqrt(N_DRAWS)
            assert abs(values.mean() - expected) < 4.0 * se
