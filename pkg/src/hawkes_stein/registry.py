"""实验注册模块.

按实验类型登记命令行实验的执行函数.

主要组成:
  - experiment: 把函数标记为某类实验的执行函数
  - ExperimentRegistry: 注册表, 支持注册, 解析与查询

内置实验的注册表由 harness.default_registry 构造.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Any

from .exceptions import ExperimentNotFoundError, RegistrationError
from .types import ExperimentKind, parse_enum

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator

logger = logging.getLogger(__name__)

Runner = Any


class ExperimentMetadata:
    """附加在执行函数上的元数据.

    Attributes:
        kind: 实验类型
        artifacts: 该实验写出的文件名
        order: kind=all 时的执行次序
    """

    def __init__(self, kind: ExperimentKind, artifacts: tuple[str, ...] = (), order: int = 0) -> None:
        """初始化元数据.

        Args:
            kind: 实验类型
            artifacts: 写出的文件名
            order: 执行次序
        """
        self.kind = kind
        self.artifacts = artifacts
        self.order = order


def experiment(
    kind: ExperimentKind | str,
    *,
    artifacts: tuple[str, ...] = (),
    order: int = 0,
) -> Callable[[Runner], Runner]:
    """标记函数为某类实验的执行函数.

    Args:
        kind: 实验类型
        artifacts: 写出的文件名
        order: kind=all 时的执行次序

    Returns:
        装饰器

    Examples:
        >>> @experiment("moments", artifacts=("moments.csv",))
        ... def run_moments(config, out_dir):
        ...     return ["moments.csv"]
        >>> get_experiment_metadata(run_moments).kind
        <ExperimentKind.MOMENTS: 'moments'>
    """
    member = parse_enum(ExperimentKind, kind)
    if member is ExperimentKind.ALL:
        raise RegistrationError(member.value, "'all' is a composite kind and cannot have its own runner")

    def decorator(func: Runner) -> Runner:
        func.__hawkes_experiment__ = ExperimentMetadata(member, artifacts, order)
        return func

    return decorator


def get_experiment_metadata(func: Runner) -> ExperimentMetadata | None:
    """读取执行函数上的元数据."""
    return getattr(func, "__hawkes_experiment__", None)


def is_experiment(func: Runner) -> bool:
    """检查函数是否被 @experiment 标记."""
    return get_experiment_metadata(func) is not None


class ExperimentRegistry:
    """实验注册表.

    Examples:
        >>> registry = ExperimentRegistry()
        >>> registry.register(run_moments)
        >>> registry.is_registered("moments")
        True
    """

    def __init__(self) -> None:
        """初始化空注册表."""
        self._runners: dict[ExperimentKind, Runner] = {}

    def register(self, runner: Runner, kind: ExperimentKind | str | None = None) -> None:
        """注册执行函数.

        Args:
            runner: 执行函数, 签名为 runner(config, out_dir) -> list[str]
            kind: 实验类型, 缺省时取自 @experiment 元数据

        Raises:
            RegistrationError: 不可调用, 缺少类型或重复注册时
        """
        metadata = get_experiment_metadata(runner)
        if kind is None and metadata is None:
            raise RegistrationError(getattr(runner, "__name__", runner), "missing @experiment metadata")
        member = parse_enum(ExperimentKind, kind) if kind is not None else metadata.kind  # type: ignore[union-attr]
        if not callable(runner):
            raise RegistrationError(member.value, "runner is not callable")
        if member in self._runners:
            raise RegistrationError(member.value, "already registered")
        if metadata is None:
            runner.__hawkes_experiment__ = ExperimentMetadata(member)
        self._runners[member] = runner
        logger.debug("registered experiment %s -> %s", member.value, getattr(runner, "__name__", runner))

    def resolve(self, kind: ExperimentKind | str) -> Runner:
        """按类型取出执行函数.

        Raises:
            ExperimentNotFoundError: 未注册时
        """
        try:
            member = parse_enum(ExperimentKind, kind)
        except ValueError:
            member = kind
        runner = self._runners.get(member)  # type: ignore[arg-type]
        if runner is None:
            raise ExperimentNotFoundError(kind, [k.value for k in self._runners])
        return runner

    def is_registered(self, kind: ExperimentKind | str) -> bool:
        """检查实验类型是否已注册."""
        try:
            return parse_enum(ExperimentKind, kind) in self._runners
        except ValueError:
            return False

    def plan(self, kind: ExperimentKind | str) -> list[ExperimentKind]:
        """返回要执行的实验类型; all 展开为按 order 排序的全部已注册类型."""
        member = parse_enum(ExperimentKind, kind)
        if member is ExperimentKind.ALL:
            return sorted(self._runners, key=lambda k: (self._runners[k].__hawkes_experiment__.order, k.value))
        self.resolve(member)
        return [member]

    def __iter__(self) -> Iterator[ExperimentKind]:
        return iter(self._runners)

    def __len__(self) -> int:
        return len(self._runners)


def build_registry(*runners: Runner) -> ExperimentRegistry:
    """由一组带 @experiment 标记的函数构造注册表."""
    registry = ExperimentRegistry()
    for runner in runners:
        registry.register(runner)
    return registry
