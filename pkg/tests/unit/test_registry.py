"""实验注册表测试.

测试:
- @experiment 装饰器元数据
- 注册, 查找与重复注册
- all 的执行计划
"""

import pytest

from hawkes_stein import (
    ExperimentKind,
    ExperimentNotFoundError,
    ExperimentRegistry,
    RegistrationError,
    default_registry,
    experiment,
)
from hawkes_stein.registry import build_registry, get_experiment_metadata, is_experiment


@experiment(ExperimentKind.MOMENTS, artifacts=("moments.csv",), order=0)
def fake_moments(config, context):
    return ["moments.csv"]


@experiment("bound", artifacts=("bounds.csv",), order=1)
def fake_bound(config, context):
    return ["bounds.csv"]


def plain_runner(config, context):
    return []


class TestExperimentDecorator:
    """@experiment 装饰器测试."""

    def test_metadata(self) -> None:
        metadata = get_experiment_metadata(fake_bound)
        assert metadata is not None
        assert metadata.kind is ExperimentKind.BOUND
        assert metadata.artifacts == ("bounds.csv",)
        assert metadata.order == 1

    def test_is_experiment(self) -> None:
        assert is_experiment(fake_moments)
        assert not is_experiment(plain_runner)

    def test_all_is_rejected(self) -> None:
        """测试 all 不能拥有独立的执行函数."""
        with pytest.raises(RegistrationError, match="composite"):
            experiment(ExperimentKind.ALL)

    def test_unknown_kind(self) -> None:
        with pytest.raises(ValueError):
            experiment("sweep")


class TestExperimentRegistry:
    """ExperimentRegistry 测试."""

    def test_register_and_resolve(self) -> None:
        registry = ExperimentRegistry()
        registry.register(fake_moments)
        assert registry.resolve("moments") is fake_moments
        assert registry.resolve(ExperimentKind.MOMENTS) is fake_moments
        assert registry.is_registered("moments")
        assert len(registry) == 1

    def test_register_with_explicit_kind(self) -> None:
        """测试无元数据的函数可显式指定类型."""
        registry = ExperimentRegistry()

        def runner(config, context):
            return []

        registry.register(runner, kind="rate")
        assert registry.resolve("rate") is runner
        assert get_experiment_metadata(runner).kind is ExperimentKind.RATE

    def test_missing_metadata(self) -> None:
        with pytest.raises(RegistrationError, match="missing @experiment metadata"):
            ExperimentRegistry().register(plain_runner)

    def test_duplicate(self) -> None:
        registry = build_registry(fake_moments)
        with pytest.raises(RegistrationError, match="already registered"):
            registry.register(fake_moments)

    def test_resolve_unknown(self) -> None:
        registry = build_registry(fake_moments)
        with pytest.raises(ExperimentNotFoundError) as info:
            registry.resolve("bound")
        assert info.value.registered == ["moments"]

    def test_is_registered_unknown_string(self) -> None:
        assert not build_registry(fake_moments).is_registered("sweep")

    def test_plan_single(self) -> None:
        assert build_registry(fake_moments, fake_bound).plan("bound") == [ExperimentKind.BOUND]

    def test_plan_all_sorted_by_order(self) -> None:
        registry = build_registry(fake_bound, fake_moments)
        assert registry.plan("all") == [ExperimentKind.MOMENTS, ExperimentKind.BOUND]

    def test_plan_unregistered(self) -> None:
        with pytest.raises(ExperimentNotFoundError):
            build_registry(fake_moments).plan("distance")

    def test_iteration(self) -> None:
        assert list(build_registry(fake_moments, fake_bound)) == [ExperimentKind.MOMENTS, ExperimentKind.BOUND]


class TestDefaultRegistry:
    """内置实验注册表测试."""

    def test_covers_every_kind(self) -> None:
        registry = default_registry()
        assert set(registry) == set(ExperimentKind) - {ExperimentKind.ALL}

    def test_all_plan_order(self) -> None:
        plan = default_registry().plan("all")
        assert plan[0] is ExperimentKind.MOMENTS
        assert len(plan) == 5
