"""异常类定义模块.

定义了 Hawkes 模拟与 Stein 界估计中使用的所有自定义异常类型.
包括:
  - 定义域异常
  - 稳定性(‖Φ‖₁ < 1)异常
  - 构造异常
  - 稀疏化上界违例(内部不变量)
  - 耦合异常
  - 配置异常
  - 报告写入异常
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


class HawkesSteinException(Exception):
    """异常基类.

    所有库内异常都继承自此基类.

    Attributes:
        message: 异常消息
        context: 相关上下文(如果适用)
    """

    def __init__(
        self,
        message: str,
        context: Any | None = None,
    ) -> None:
        """初始化异常.

        Args:
            message: 异常消息
            context: 相关上下文
        """
        self.message = message
        self.context = context
        super().__init__(message)

    def __str__(self) -> str:
        """返回异常的字符串表示."""
        if self.context is not None:
            return f"{self.__class__.__name__}: {self.message} ({self.context})"
        return f"{self.__class__.__name__}: {self.message}"


class DomainError(HawkesSteinException):
    """定义域异常.

    参数落在操作的定义域之外时抛出, 例如负时间, t ∉ [0, T], γ² ≤ 0.

    Attributes:
        argument: 参数名
        value: 参数值
        reason: 违反的约束

    Examples:
        >>> phi_eval(ExponentialKernel(1.0, 2.0), -1.0)
        Traceback (most recent call last):
            ...
        DomainError: Argument 't' = -1.0 is out of domain: requires t >= 0
    """

    def __init__(self, argument: str, value: Any, reason: str) -> None:
        """初始化定义域异常.

        Args:
            argument: 参数名
            value: 参数值
            reason: 违反的约束
        """
        self.argument = argument
        self.value = value
        self.reason = reason
        super().__init__(f"Argument '{argument}' = {value!r} is out of domain: {reason}")


class StabilityError(HawkesSteinException):
    """稳定性异常.

    核函数不满足 ‖Φ‖₁ < 1 或参数条件(指数核 α < β, Erlang 核 α < β²)时抛出.

    Attributes:
        kernel_name: 核函数名称
        l1_norm: ‖Φ‖₁ (如已知)
        reason: 失败原因
    """

    def __init__(self, kernel_name: str, reason: str, l1_norm: float | None = None) -> None:
        """初始化稳定性异常.

        Args:
            kernel_name: 核函数名称
            reason: 失败原因
            l1_norm: ‖Φ‖₁
        """
        self.kernel_name = kernel_name
        self.reason = reason
        self.l1_norm = l1_norm
        message = f"stability: {reason}"
        if l1_norm is not None:
            message += f" (||phi||_1 = {l1_norm:.6g})"
        super().__init__(message, kernel_name)


class ConstructionError(HawkesSteinException):
    """构造异常.

    标记分布或列表核构造参数无效时抛出.

    Attributes:
        type_name: 被构造的类型名
        reason: 失败原因
    """

    def __init__(self, type_name: str, reason: str) -> None:
        """初始化构造异常.

        Args:
            type_name: 被构造的类型名
            reason: 失败原因
        """
        self.type_name = type_name
        self.reason = reason
        super().__init__(f"Cannot construct {type_name}: {reason}")


class MajorantViolationError(HawkesSteinException):
    """稀疏化上界违例.

    候选点处的实际强度超过了局部上界 λ̄, 说明上界实现有误, 必须中止.

    Attributes:
        time: 候选时间
        intensity: 实际强度
        majorant: 上界
    """

    def __init__(self, time: float, intensity: float, majorant: float) -> None:
        """初始化上界违例异常.

        Args:
            time: 候选时间
            intensity: 实际强度
            majorant: 上界
        """
        self.time = time
        self.intensity = intensity
        self.majorant = majorant
        super().__init__(
            f"Thinning majorant violated at t={time:.12g}: intensity {intensity:.12g} > majorant {majorant:.12g}"
        )


class CouplingError(HawkesSteinException):
    """耦合异常.

    基础带与平移带重叠, 或存储的候选流上限不足以覆盖 λ + λ̂ 时抛出.
    """

    def __init__(self, reason: str) -> None:
        """初始化耦合异常.

        Args:
            reason: 失败原因
        """
        super().__init__(f"Coupling invariant violated: {reason}")


class UnsupportedKernelError(HawkesSteinException):
    """不支持的核函数异常.

    操作要求 Markov 可表示的核(指数或 Erlang)而收到其他核时抛出.

    Attributes:
        kernel_name: 核函数名称
        operation: 操作名
    """

    def __init__(self, kernel_name: str, operation: str) -> None:
        """初始化不支持核异常.

        Args:
            kernel_name: 核函数名称
            operation: 操作名
        """
        self.kernel_name = kernel_name
        self.operation = operation
        super().__init__(f"Operation '{operation}' does not support kernel '{kernel_name}'")


@dataclass(frozen=True)
class ConfigIssue:
    """单条配置问题.

    Attributes:
        line: 源文本行号(未知时为 None)
        key: 相关键, 形如 "section.key"
        message: 问题描述
    """

    line: int | None
    key: str
    message: str

    def __str__(self) -> str:
        """返回字符串表示."""
        where = f"line {self.line}" if self.line is not None else "<missing>"
        return f"{where}: {self.key}: {self.message}"


class ConfigError(HawkesSteinException):
    """配置异常.

    配置文本解析或校验失败时抛出, 一次性汇总全部问题.

    Attributes:
        issues: 问题列表

    Examples:
        >>> text = "[experiment]\\nkind = bound\\n[model]\\nkernel = exponential\\nalpha = 3\\nbeta = 2\\nmu = 1\\n"
        >>> parse_config(text)
        Traceback (most recent call last):
            ...
        ConfigError: 1 configuration error(s): line 5: model.alpha: stability: requires alpha < beta
    """

    def __init__(self, issues: list[ConfigIssue]) -> None:
        """初始化配置异常.

        Args:
            issues: 问题列表
        """
        self.issues = list(issues)
        detail = "; ".join(str(issue) for issue in self.issues)
        super().__init__(f"{len(self.issues)} configuration error(s): {detail}")


class ReportWriteError(HawkesSteinException):
    """报告写入异常.

    写 CSV 或 manifest 失败时抛出.

    Attributes:
        path: 目标路径
        original_exception: 原始异常
    """

    def __init__(self, path: Any, original_exception: Exception | None = None) -> None:
        """初始化报告写入异常.

        Args:
            path: 目标路径
            original_exception: 原始异常
        """
        self.path = path
        self.original_exception = original_exception
        message = f"Failed to write artifact '{path}'"
        if original_exception:
            message += f": {original_exception!s}"
        super().__init__(message)


class RegistrationError(HawkesSteinException):
    """实验注册异常.

    同一实验类型被重复注册, 或被注册对象不可调用时抛出.

    Attributes:
        kind: 实验类型
        reason: 失败原因
    """

    def __init__(self, kind: Any, reason: str) -> None:
        """初始化注册异常.

        Args:
            kind: 实验类型
            reason: 失败原因
        """
        self.kind = kind
        self.reason = reason
        super().__init__(f"Failed to register experiment '{kind}': {reason}")


class ExperimentNotFoundError(HawkesSteinException):
    """实验未找到异常.

    Attributes:
        kind: 请求的实验类型
        registered: 已注册的实验类型
    """

    def __init__(self, kind: Any, registered: list[Any] | None = None) -> None:
        """初始化实验未找到异常.

        Args:
            kind: 请求的实验类型
            registered: 已注册的实验类型
        """
        self.kind = kind
        self.registered = registered or []
        message = f"Experiment '{kind}' is not registered"
        if self.registered:
            message += f". Registered experiments: {', '.join(str(k) for k in self.registered)}"
        super().__init__(message)
