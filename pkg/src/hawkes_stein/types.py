"""核心类型定义模块.

定义了库中共享的枚举与类型别名.
包含:
  - 核函数变体枚举
  - 标记分布变体枚举
  - 统计量标签枚举
  - 实验类型枚举
  - 数组类型别名
"""

from __future__ import annotations

from enum import Enum
from typing import Any

import numpy as np
import numpy.typing as npt

# ===================== 数组类型别名 =====================

# 一维浮点数组
FloatArray = npt.NDArray[np.float64]

# 可被转换为浮点数组的输入
ArrayLike = npt.ArrayLike


# ===================== 核函数变体 =====================


class KernelKind(Enum):
    """激励核变体.

    Attributes:
        EXPONENTIAL: Φ(t) = α e^{-βt}, 要求 0 < α < β
        ERLANG: Φ(t) = α t e^{-βt}, 要求 0 < α < β²
        ZERO: Φ ≡ 0 (齐次 Poisson)
        TABULATED: 网格上的分段线性核, 网格外为 0
    """

    EXPONENTIAL = "exponential"
    ERLANG = "erlang"
    ZERO = "zero"
    TABULATED = "tabulated"


# ===================== 标记分布变体 =====================


class MarkKind(Enum):
    """跳跃大小分布 ν 的变体.

    配置文件中的名称见各成员的值.
    """

    POINT_ONE = "point_one"
    TWO_POINT = "two_point"
    GAUSSIAN = "gaussian"
    LOGNORMAL = "lognormal"
    EMPIRICAL = "empirical"


# ===================== 统计量标签 =====================


class StatisticTag(Enum):
    """距离曲线所用的统计量.

    Attributes:
        F: F_T = (X_T − m∫λ)/√T, 极限方差 σ²ϑ²
        Y: Y_T = (H_T − E[H_T])/√T, 极限方差 σ̃²
    """

    F = "F"
    Y = "Y"


# ===================== 实验类型 =====================


class ExperimentKind(Enum):
    """命令行实验类型.

    ALL 依次运行其余全部实验.
    """

    MOMENTS = "moments"
    BOUND = "bound"
    DISTANCE = "distance"
    RATE = "rate"
    IBP_CHECK = "ibp_check"
    ALL = "all"


def parse_enum(enum_type: type[Enum], value: Any) -> Any:
    """按值解析枚举成员(大小写不敏感).

    Args:
        enum_type: 枚举类型
        value: 枚举成员或其值

    Returns:
        枚举成员

    Raises:
        ValueError: 值不属于该枚举时
    """
    if isinstance(value, enum_type):
        return value
    text = str(value).strip().lower()
    for member in enum_type:
        if str(member.value).lower() == text:
            return member
    allowed = ", ".join(str(m.value) for m in enum_type)
    msg = f"unknown {enum_type.__name__} '{value}' (expected one of: {allowed})"
    raise ValueError(msg)
