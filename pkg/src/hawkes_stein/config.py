"""实验配置模块.

解析 INI 风格的实验配置:

    [experiment]
    kind = rate
    seed = 7
    out_dir = results

    [model]
    kernel = exponential
    alpha = 1
    beta = 2
    mu = 1

    [marks]
    dist = point_one

    [budget]
    n_paths = 5000
    k_grid = 64
    T_grid = 25,50,100,200,400

全部问题(含行号)一次性收集到 ConfigError 中.
"""

from __future__ import annotations

import configparser
import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from .bounds import MIN_REPLICATIONS, WeightFunction
from .distance import MIN_SAMPLES
from .exceptions import ConfigError, ConfigIssue, ConstructionError, StabilityError
from .kernels import ErlangKernel, make_kernel
from .marks import make_marks
from .reports import canonical_json_bytes, sha256_bytes
from .rng import STREAMS_PER_REPLICATION
from .simulation import ERLANG_WINDOW_FACTOR
from .types import ExperimentKind, KernelKind, MarkKind, parse_enum

if TYPE_CHECKING:
    from collections.abc import Callable

    from .kernels import Kernel
    from .marks import MarkDistribution

logger = logging.getLogger(__name__)

DEFAULT_N_PATHS = 5000
DEFAULT_K_GRID = 64
DEFAULT_T_GRID = (25.0, 50.0, 100.0, 200.0, 400.0)
DEFAULT_N_BOOT = 200
DEFAULT_MOMENT_GRID_STEP = 1.0
DEFAULT_OUT_DIR = "results"
DEFAULT_LOG_LEVEL = "INFO"

# 各节允许的键; 取值为是否必需
SECTION_KEYS: dict[str, dict[str, bool]] = {
    "experiment": {
        "kind": True,
        "seed": False,
        "out_dir": False,
        "workers": False,
        "dump_paths": False,
        "gamma2": False,
        "weight_levels": False,
        "log_level": False,
    },
    "model": {
        "kernel": True,
        "mu": True,
        "alpha": False,
        "beta": False,
        "table_path": False,
        "psi_step": False,
        "psi_horizon": False,
        "erlang_window": False,
    },
    "marks": {
        "dist": False,
        "a": False,
        "b": False,
        "p": False,
        "mean": False,
        "sd": False,
        "logmean": False,
        "logsd": False,
        "values": False,
    },
    "budget": {
        "n_paths": False,
        "k_grid": False,
        "t_grid": False,
        "n_boot": False,
        "moment_grid_step": False,
    },
}

MARK_PARAMS: dict[MarkKind, tuple[str, ...]] = {
    MarkKind.POINT_ONE: (),
    MarkKind.TWO_POINT: ("a", "b", "p"),
    MarkKind.GAUSSIAN: ("mean", "sd"),
    MarkKind.LOGNORMAL: ("logmean", "logsd"),
    MarkKind.EMPIRICAL: ("values",),
}

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


@dataclass(frozen=True)
class ExperimentConfig:
    """校验后的实验配置.

    Attributes:
        kind: 实验类型
        kernel: 已构造的激励核
        marks: 已构造的标记分布
        mu: 基础强度
        kernel_kind: 核变体
        mark_kind: 标记分布变体
        alpha: 核幅度(指数/Erlang)
        beta: 核衰减率(指数/Erlang)
        table_path: 列表核文件
        psi_step: 列表核 ψ 网格步长
        psi_horizon: 列表核 ψ 网格长度
        erlang_window: Erlang 核上界刷新窗口
        mark_params: 标记分布参数
        seed: 主种子
        out_dir: 输出目录
        workers: 进程数, None 表示机器并行度
        dump_paths: 写出的基础路径条数
        gamma2: 加权界使用的 γ²
        weight_levels: 等分 [0, T] 的权重水平(乘以 1/√T)
        log_level: 日志级别
        n_paths: 每个 T 的外层路径数
        k_grid: 平移网格点数
        T_grid: 时间范围网格
        n_boot: bootstrap 重抽样次数
        moment_grid_step: 矩报告的时间步长
    """

    kind: ExperimentKind
    kernel: Kernel
    marks: MarkDistribution
    mu: float
    kernel_kind: KernelKind
    mark_kind: MarkKind = MarkKind.POINT_ONE
    alpha: float | None = None
    beta: float | None = None
    table_path: str | None = None
    psi_step: float | None = None
    psi_horizon: float | None = None
    erlang_window: float | None = None
    mark_params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out_dir: Path = Path(DEFAULT_OUT_DIR)
    workers: int | None = None
    dump_paths: int = 0
    gamma2: float | None = None
    weight_levels: tuple[float, ...] | None = None
    log_level: str = DEFAULT_LOG_LEVEL
    n_paths: int = DEFAULT_N_PATHS
    k_grid: int = DEFAULT_K_GRID
    T_grid: tuple[float, ...] = DEFAULT_T_GRID
    n_boot: int = DEFAULT_N_BOOT
    moment_grid_step: float = DEFAULT_MOMENT_GRID_STEP

    @property
    def window(self) -> float | None:
        """稀疏化上界刷新窗口(仅 Erlang 核可配置)."""
        if isinstance(self.kernel, ErlangKernel):
            return self.erlang_window if self.erlang_window is not None else ERLANG_WINDOW_FACTOR / self.kernel.beta
        return None

    def weight_for(self, T: float) -> WeightFunction | None:
        """时间范围 T 上的加权函数: 第 k 段取 weight_levels[k]/√T."""
        if self.weight_levels is None:
            return None
        levels = np.asarray(self.weight_levels, dtype=np.float64) / math.sqrt(T)
        return WeightFunction(np.linspace(0.0, T, levels.size + 1), levels)

    def canonical(self) -> dict[str, Any]:
        """影响输出的全部设置; 不含 out_dir, workers, log_level."""
        return {
            "experiment": {
                "kind": self.kind.value,
                "seed": self.seed,
                "dump_paths": self.dump_paths,
                "gamma2": self.gamma2,
                "weight_levels": list(self.weight_levels) if self.weight_levels is not None else None,
            },
            "model": {
                **self.kernel.describe(),
                "mu": self.mu,
                "psi_step": self.psi_step,
                "psi_horizon": self.psi_horizon,
                "window": self.window,
            },
            "marks": self.marks.describe() | {"params": _jsonable(self.mark_params)},
            "budget": {
                "n_paths": self.n_paths,
                "k_grid": self.k_grid,
                "T_grid": list(self.T_grid),
                "n_boot": self.n_boot,
                "moment_grid_step": self.moment_grid_step,
            },
        }

    def config_hash(self) -> str:
        """canonical() 的 sha256."""
        return sha256_bytes(canonical_json_bytes(self.canonical()))

    def with_overrides(self, **changes: Any) -> ExperimentConfig:
        """返回覆盖部分字段后的新配置; 值为 None 的项被忽略."""
        updates = {key: value for key, value in changes.items() if value is not None}
        if "out_dir" in updates:
            updates["out_dir"] = Path(updates["out_dir"])
        return replace(self, **updates)


def _jsonable(params: dict[str, Any]) -> dict[str, Any]:
    sequences = tuple | list | np.ndarray
    return {key: list(value) if isinstance(value, sequences) else value for key, value in params.items()}


# ===================== 解析 =====================


class _Reader:
    """按 (节, 键) 读取并转换取值, 记录问题与行号."""

    def __init__(self, parser: configparser.ConfigParser, lines: dict[tuple[str, str], int]) -> None:
        self.parser = parser
        self.lines = lines
        self.issues: list[ConfigIssue] = []

    def line(self, section: str, key: str) -> int | None:
        return self.lines.get((section, key))

    def issue(self, section: str, key: str, message: str) -> None:
        self.issues.append(ConfigIssue(self.line(section, key), f"{section}.{key}", message))

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def get(self, section: str, key: str, convert: Callable[[str], Any], default: Any = None) -> Any:
        if not self.has(section, key):
            if SECTION_KEYS[section].get(key):
                self.issues.append(ConfigIssue(None, f"{section}.{key}", "missing required key"))
            return default
        raw = self.parser.get(section, key).strip()
        try:
            return convert(raw)
        except ValueError as e:
            self.issue(section, key, f"invalid value '{raw}': {e!s}")
            return default

    def check(self, condition: bool, section: str, key: str, message: str) -> None:
        if not condition:
            self.issue(section, key, message)


def _to_int(raw: str) -> int:
    return int(raw)


def _to_float(raw: str) -> float:
    value = float(raw)
    if not math.isfinite(value):
        msg = "must be finite"
        raise ValueError(msg)
    return value


def _to_floats(raw: str) -> tuple[float, ...]:
    parts = [p for p in (s.strip() for s in raw.split(",")) if p]
    if not parts:
        msg = "expected a comma-separated list of numbers"
        raise ValueError(msg)
    return tuple(_to_float(p) for p in parts)


def _enum(enum_type: Any) -> Callable[[str], Any]:
    def convert(raw: str) -> Any:
        return parse_enum(enum_type, raw)

    return convert


def _scan_lines(text: str) -> dict[tuple[str, str], int]:
    """记录每个 (节, 键) 首次出现的行号."""
    lines: dict[tuple[str, str], int] = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        if match := _SECTION_RE.match(line):
            section = match.group(1).strip().lower()
            lines.setdefault((section, ""), number)
        elif match := _KEY_RE.match(line):
            lines.setdefault((section, match.group(1).strip().lower()), number)
    return lines


def _read_parser(text: str) -> tuple[configparser.ConfigParser, list[ConfigIssue]]:
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        return parser, [ConfigIssue(e.lineno, "<header>", "key outside of any [section]")]
    except configparser.ParsingError as e:
        return parser, [ConfigIssue(lineno, "<syntax>", f"cannot parse {line!r}") for lineno, line in e.errors]
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        return parser, [ConfigIssue(e.lineno, getattr(e, "section", "<section>"), str(e.message))]
    return parser, []


def parse_config(text: str, *, base_dir: str | Path | None = None) -> ExperimentConfig:
    """解析并校验配置文本.

    Args:
        text: UTF-8 配置文本
        base_dir: 解析相对 table_path 的目录

    Returns:
        ExperimentConfig, 未给出的键取默认值

    Raises:
        ConfigError: 存在任何问题时, 汇总全部问题及其行号

    Examples:
        >>> text = "[experiment]\\nkind = bound\\n[model]\\nkernel = erlang\\nalpha = 3\\nbeta = 2\\nmu = 1\\n"
        >>> parse_config(text).n_paths
        5000
    """
    parser, issues = _read_parser(text)
    if issues:
        raise ConfigError(issues)
    reader = _Reader(parser, _scan_lines(text))

    for section in parser.sections():
        if section not in SECTION_KEYS:
            reader.issue(section, "", f"unknown section [{section}]")
            continue
        for key in parser.options(section):
            if key not in SECTION_KEYS[section]:
                reader.issue(section, key, "unknown key")
    for section, keys in SECTION_KEYS.items():
        if not parser.has_section(section) and any(keys.values()):
            reader.issues.append(ConfigIssue(None, section, f"missing required section [{section}]"))
            parser.add_section(section)
    for section in SECTION_KEYS:
        if not parser.has_section(section):
            parser.add_section(section)

    values = _read_experiment(reader) | _read_budget(reader)
    model = _read_model(reader, base_dir)
    marks = _read_marks(reader)
    _cross_checks(reader, values)

    if reader.issues:
        raise ConfigError(reader.issues)
    logger.debug("parsed configuration: kind=%s kernel=%s", values["kind"].value, model["kernel"].name)
    return ExperimentConfig(**values, **model, **marks)


def _read_experiment(reader: _Reader) -> dict[str, Any]:
    s = "experiment"
    kind = reader.get(s, "kind", _enum(ExperimentKind))
    seed = reader.get(s, "seed", _to_int, 0)
    reader.check(0 <= seed < 2**64, s, "seed", "requires 0 <= seed < 2^64")
    workers = reader.get(s, "workers", _to_int)
    reader.check(workers is None or workers >= 1, s, "workers", "requires workers >= 1")
    dump_paths = reader.get(s, "dump_paths", _to_int, 0)
    reader.check(dump_paths >= 0, s, "dump_paths", "requires dump_paths >= 0")
    gamma2 = reader.get(s, "gamma2", _to_float)
    reader.check(gamma2 is None or gamma2 > 0, s, "gamma2", "requires gamma2 > 0")
    weight_levels = reader.get(s, "weight_levels", _to_floats)
    reader.check(
        weight_levels is None or gamma2 is not None, s, "weight_levels", "requires gamma2 to be set as well"
    )
    log_level = reader.get(s, "log_level", str, DEFAULT_LOG_LEVEL).upper()
    reader.check(
        log_level in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}, s, "log_level", "unknown log level"
    )
    return {
        "kind": kind,
        "seed": seed,
        "out_dir": Path(reader.get(s, "out_dir", str, DEFAULT_OUT_DIR)),
        "workers": workers,
        "dump_paths": dump_paths,
        "gamma2": gamma2,
        "weight_levels": weight_levels,
        "log_level": log_level,
    }


def _read_budget(reader: _Reader) -> dict[str, Any]:
    s = "budget"
    n_paths = reader.get(s, "n_paths", _to_int, DEFAULT_N_PATHS)
    reader.check(n_paths >= MIN_REPLICATIONS, s, "n_paths", f"requires n_paths >= {MIN_REPLICATIONS}")
    k_grid = reader.get(s, "k_grid", _to_int, DEFAULT_K_GRID)
    reader.check(
        2 <= k_grid < STREAMS_PER_REPLICATION, s, "k_grid", f"requires 2 <= k_grid < {STREAMS_PER_REPLICATION}"
    )
    t_grid = reader.get(s, "t_grid", _to_floats, DEFAULT_T_GRID)
    reader.check(
        all(t > 0 for t in t_grid) and all(b > a for a, b in zip(t_grid, t_grid[1:], strict=False)),
        s,
        "t_grid",
        "requires strictly increasing positive values",
    )
    n_boot = reader.get(s, "n_boot", _to_int, DEFAULT_N_BOOT)
    reader.check(n_boot >= 2, s, "n_boot", "requires n_boot >= 2")
    step = reader.get(s, "moment_grid_step", _to_float, DEFAULT_MOMENT_GRID_STEP)
    reader.check(step > 0, s, "moment_grid_step", "requires moment_grid_step > 0")
    return {"n_paths": n_paths, "k_grid": k_grid, "T_grid": t_grid, "n_boot": n_boot, "moment_grid_step": step}


def _read_model(reader: _Reader, base_dir: str | Path | None) -> dict[str, Any]:
    s = "model"
    kind = reader.get(s, "kernel", _enum(KernelKind))
    mu = reader.get(s, "mu", _to_float)
    reader.check(mu is None or mu > 0, s, "mu", "requires mu > 0")
    alpha = reader.get(s, "alpha", _to_float)
    beta = reader.get(s, "beta", _to_float)
    table_path = reader.get(s, "table_path", str)
    psi_step = reader.get(s, "psi_step", _to_float)
    psi_horizon = reader.get(s, "psi_horizon", _to_float)
    window = reader.get(s, "erlang_window", _to_float)
    reader.check(window is None or window > 0, s, "erlang_window", "requires erlang_window > 0")

    kernel = None
    if kind in (KernelKind.EXPONENTIAL, KernelKind.ERLANG):
        for key, value in (("alpha", alpha), ("beta", beta)):
            if value is None and not reader.has(s, key):
                reader.issues.append(ConfigIssue(None, f"{s}.{key}", f"missing required key for kernel {kind.value}"))
    if kind is KernelKind.TABULATED and table_path is None:
        reader.issues.append(ConfigIssue(None, f"{s}.table_path", "missing required key for kernel tabulated"))
    if kind is not KernelKind.ERLANG and window is not None:
        reader.issue(s, "erlang_window", "only applies to kernel = erlang")
    if table_path is not None and base_dir is not None and not Path(table_path).is_absolute():
        table_path = str(Path(base_dir) / table_path)

    ready = kind is not None and (kind not in (KernelKind.EXPONENTIAL, KernelKind.ERLANG) or None not in (alpha, beta))
    if ready and not (kind is KernelKind.TABULATED and table_path is None):
        try:
            kernel = make_kernel(
                kind, alpha=alpha, beta=beta, table_path=table_path, psi_step=psi_step, psi_horizon=psi_horizon
            )
        except StabilityError as e:
            reader.issue(s, "alpha" if reader.has(s, "alpha") else "kernel", f"stability: {e.reason}")
        except ConstructionError as e:
            reader.issue(s, "table_path" if kind is KernelKind.TABULATED else "kernel", e.reason)
    return {
        "kernel": kernel,
        "mu": mu,
        "kernel_kind": kind,
        "alpha": alpha,
        "beta": beta,
        "table_path": table_path,
        "psi_step": psi_step,
        "psi_horizon": psi_horizon,
        "erlang_window": window,
    }


def _read_marks(reader: _Reader) -> dict[str, Any]:
    s = "marks"
    kind = reader.get(s, "dist", _enum(MarkKind), MarkKind.POINT_ONE)
    if kind is None:
        return {"marks": None, "mark_kind": MarkKind.POINT_ONE, "mark_params": {}}
    params: dict[str, Any] = {}
    for key in SECTION_KEYS[s]:
        if key == "dist" or not reader.has(s, key):
            continue
        if key not in MARK_PARAMS[kind]:
            reader.issue(s, key, f"not a parameter of dist = {kind.value}")
            continue
        value = reader.get(s, key, _to_floats if key == "values" else _to_float)
        if value is not None:
            params[key] = value
    marks = None
    try:
        marks = make_marks(kind, params)
    except ConstructionError as e:
        reader.issue(s, "dist", e.reason)
    return {"marks": marks, "mark_kind": kind, "mark_params": params}


def _cross_checks(reader: _Reader, values: dict[str, Any]) -> None:
    kind = values["kind"]
    if kind in (ExperimentKind.DISTANCE, ExperimentKind.RATE, ExperimentKind.ALL):
        reader.check(
            values["n_paths"] >= MIN_SAMPLES,
            "budget",
            "n_paths",
            f"distance experiments require n_paths >= {MIN_SAMPLES}",
        )
    if kind in (ExperimentKind.RATE, ExperimentKind.ALL):
        reader.check(len(values["T_grid"]) >= 4, "budget", "t_grid", "rate fitting requires at least 4 horizons")


def load_config(path: str | Path) -> ExperimentConfig:
    """读取 UTF-8 配置文件; 相对 table_path 以文件所在目录为基准.

    Raises:
        ConfigError: 文件不可读或内容无效时
    """
    file = Path(path)
    try:
        text = file.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError([ConfigIssue(None, str(file), f"cannot read configuration: {e!s}")]) from e
    return parse_config(text, base_dir=file.parent)
