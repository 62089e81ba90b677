"""标记(跳跃大小)分布模块.

每个分布在构造时计算并缓存矩 m, ϑ², E|Y|³ 以及 E|Y|, E[Y|Y|];
任何变体都不允许在 0 处有原子.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, ClassVar, NamedTuple

import numpy as np
from scipy.stats import norm

from .exceptions import ConstructionError
from .rng import RandomState
from .types import FloatArray, MarkKind

if TYPE_CHECKING:
    from collections.abc import Sequence


class MarkMoments(NamedTuple):
    """标记分布的矩.

    Attributes:
        m: 一阶矩 E[Y]
        theta2: 二阶矩 ϑ² = E[Y²]
        abs3: 三阶绝对矩 E|Y|³
        abs1: 一阶绝对矩 E|Y|
        signed2: E[Y|Y|]
    """

    m: float
    theta2: float
    abs3: float
    abs1: float
    signed2: float


class MarkDistribution(ABC):
    """标记分布抽象基类."""

    kind: ClassVar[MarkKind]
    moments: MarkMoments

    @property
    def name(self) -> str:
        """分布名称(与配置文件中的写法一致)."""
        return self.kind.value

    @abstractmethod
    def _compute_moments(self) -> MarkMoments:
        """计算解析矩."""

    @abstractmethod
    def sample(self, generator: np.random.Generator, size: int | None = None) -> Any:
        """抽样.

        Args:
            generator: 随机数生成器
            size: 样本数, None 时返回标量

        Returns:
            标量或数组
        """

    def _cache_moments(self) -> None:
        moments = self._compute_moments()
        if not all(math.isfinite(v) for v in moments):
            raise ConstructionError(type(self).__name__, f"non-finite moments {tuple(moments)}")
        object.__setattr__(self, "moments", moments)

    @property
    def m(self) -> float:
        """E[Y]."""
        return self.moments.m

    @property
    def theta2(self) -> float:
        """ϑ²."""
        return self.moments.theta2

    @property
    def abs3(self) -> float:
        """E|Y|³."""
        return self.moments.abs3

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {"dist": self.name}


@dataclass(frozen=True)
class PointMassOne(MarkDistribution):
    """ν = δ₁, 即普通 Hawkes 计数过程."""

    kind: ClassVar[MarkKind] = MarkKind.POINT_ONE
    moments: MarkMoments = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """缓存矩."""
        self._cache_moments()

    def _compute_moments(self) -> MarkMoments:
        return MarkMoments(1.0, 1.0, 1.0, 1.0, 1.0)

    def sample(self, generator: np.random.Generator, size: int | None = None) -> Any:
        """恒为 1."""
        if size is None:
            return 1.0
        return np.ones(size, dtype=np.float64)


@dataclass(frozen=True)
class TwoPoint(MarkDistribution):
    """两点分布 P(Y = a) = p, P(Y = b) = 1 − p.

    Attributes:
        a: 第一个取值(非零)
        b: 第二个取值(非零)
        p: 取 a 的概率
    """

    a: float
    b: float
    p: float
    kind: ClassVar[MarkKind] = MarkKind.TWO_POINT
    moments: MarkMoments = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """校验参数并缓存矩."""
        if self.a == 0 or self.b == 0:
            raise ConstructionError("TwoPoint", "values must be nonzero")
        if not 0.0 < self.p < 1.0:
            raise ConstructionError("TwoPoint", f"p must lie in (0, 1), got {self.p}")
        self._cache_moments()

    def _compute_moments(self) -> MarkMoments:
        a, b, p, q = self.a, self.b, self.p, 1.0 - self.p
        return MarkMoments(
            p * a + q * b,
            p * a * a + q * b * b,
            p * abs(a) ** 3 + q * abs(b) ** 3,
            p * abs(a) + q * abs(b),
            p * a * abs(a) + q * b * abs(b),
        )

    def sample(self, generator: np.random.Generator, size: int | None = None) -> Any:
        """按概率 p 取 a, 否则取 b."""
        u = generator.random(size)
        return np.where(u < self.p, self.a, self.b) if size is not None else (self.a if u < self.p else self.b)

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {"dist": self.name, "a": self.a, "b": self.b, "p": self.p}


@dataclass(frozen=True)
class GaussianMarks(MarkDistribution):
    """正态标记 N(mean, sd²).

    折叠正态的绝对矩有闭式, 记 a = mean/sd:
    E|Y|³ = sd³[(a³+3a)(2Φ(a)−1) + 2(a²+2)φ(a)].
    """

    mean: float
    sd: float
    kind: ClassVar[MarkKind] = MarkKind.GAUSSIAN
    moments: MarkMoments = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """校验参数并缓存矩."""
        if not (math.isfinite(self.mean) and math.isfinite(self.sd)) or self.sd <= 0:
            raise ConstructionError("GaussianMarks", "requires finite mean and sd > 0")
        self._cache_moments()

    def _compute_moments(self) -> MarkMoments:
        s = self.sd
        a = self.mean / s
        centred = 2.0 * float(norm.cdf(a)) - 1.0
        density = float(norm.pdf(a))
        return MarkMoments(
            self.mean,
            self.mean**2 + s * s,
            s**3 * ((a**3 + 3.0 * a) * centred + 2.0 * (a * a + 2.0) * density),
            s * (a * centred + 2.0 * density),
            s * s * ((a * a + 1.0) * centred + 2.0 * a * density),
        )

    def sample(self, generator: np.random.Generator, size: int | None = None) -> Any:
        """正态抽样."""
        return generator.normal(self.mean, self.sd, size)

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {"dist": self.name, "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class LognormalMarks(MarkDistribution):
    """对数正态标记, log Y ~ N(logmean, logsd²)."""

    logmean: float
    logsd: float
    kind: ClassVar[MarkKind] = MarkKind.LOGNORMAL
    moments: MarkMoments = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """校验参数并缓存矩."""
        if not (math.isfinite(self.logmean) and math.isfinite(self.logsd)) or self.logsd <= 0:
            raise ConstructionError("LognormalMarks", "requires finite logmean and logsd > 0")
        self._cache_moments()

    def _compute_moments(self) -> MarkMoments:
        mu, s2 = self.logmean, self.logsd**2
        m = math.exp(mu + 0.5 * s2)
        theta2 = math.exp(2.0 * mu + 2.0 * s2)
        return MarkMoments(m, theta2, math.exp(3.0 * mu + 4.5 * s2), m, theta2)

    def sample(self, generator: np.random.Generator, size: int | None = None) -> Any:
        """对数正态抽样."""
        return generator.lognormal(self.logmean, self.logsd, size)

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {"dist": self.name, "logmean": self.logmean, "logsd": self.logsd}


@dataclass(frozen=True, eq=False)
class Empirical(MarkDistribution):
    """经验分布: 在给定取值上均匀抽样."""

    values: FloatArray
    kind: ClassVar[MarkKind] = MarkKind.EMPIRICAL
    moments: MarkMoments = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """校验取值并缓存样本矩."""
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.size == 0:
            raise ConstructionError("Empirical", "values must be nonempty")
        if not np.all(np.isfinite(values)):
            raise ConstructionError("Empirical", "values must be finite")
        if np.any(values == 0):
            raise ConstructionError("Empirical", "values must not contain 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        self._cache_moments()

    def _compute_moments(self) -> MarkMoments:
        v = self.values
        mag = np.abs(v)
        return MarkMoments(
            float(v.mean()),
            float(np.mean(v * v)),
            float(np.mean(mag**3)),
            float(mag.mean()),
            float(np.mean(v * mag)),
        )

    def sample(self, generator: np.random.Generator, size: int | None = None) -> Any:
        """从取值中有放回均匀抽样."""
        idx = generator.integers(0, self.values.size, size)
        return self.values[idx] if size is not None else float(self.values[idx])

    def describe(self) -> dict[str, Any]:
        """返回用于 manifest 的参数描述."""
        return {"dist": self.name, "n_values": int(self.values.size)}


def make_marks(kind: MarkKind, params: dict[str, Any]) -> MarkDistribution:
    """按变体与参数字典构造标记分布.

    Args:
        kind: 分布变体
        params: 参数 (a, b, p / mean, sd / logmean, logsd / values)

    Returns:
        标记分布

    Raises:
        ConstructionError: 参数缺失或无效时
    """
    required: dict[MarkKind, Sequence[str]] = {
        MarkKind.POINT_ONE: (),
        MarkKind.TWO_POINT: ("a", "b", "p"),
        MarkKind.GAUSSIAN: ("mean", "sd"),
        MarkKind.LOGNORMAL: ("logmean", "logsd"),
        MarkKind.EMPIRICAL: ("values",),
    }
    missing = [key for key in required[kind] if key not in params]
    if missing:
        raise ConstructionError(kind.value, f"missing parameter(s): {', '.join(missing)}")
    if kind is MarkKind.POINT_ONE:
        return PointMassOne()
    if kind is MarkKind.TWO_POINT:
        return TwoPoint(params["a"], params["b"], params["p"])
    if kind is MarkKind.GAUSSIAN:
        return GaussianMarks(params["mean"], params["sd"])
    if kind is MarkKind.LOGNORMAL:
        return LognormalMarks(params["logmean"], params["logsd"])
    return Empirical(np.asarray(params["values"], dtype=np.float64))


def mark_moments(dist: MarkDistribution) -> tuple[float, float, float]:
    """(m, ϑ², E|Y|³)."""
    return dist.moments.m, dist.moments.theta2, dist.moments.abs3


def sample_mark(dist: MarkDistribution, rng: RandomState | np.random.Generator) -> float:
    """从 ν 中抽取一个标记.

    传入 RandomState 时每次调用都从该流的起点新建生成器, 因此同一流
    只对应一次抽样, 重复调用返回相同的值. 需要连续抽样时传入
    np.random.Generator, 它会随调用推进.

    Args:
        dist: 标记分布
        rng: 随机流标识(单次抽样)或已有生成器(连续抽样)

    Returns:
        标记值
    """
    generator = rng.generator() if isinstance(rng, RandomState) else rng
    return float(dist.sample(generator))
