"""实验编排模块.

每类实验对应一个用 @experiment 标记的执行函数; run_experiment 按配置的
类型从注册表解析执行函数, 依次运行, 写出 CSV 与 manifest.json.

随机流按子报告划分块 (主种子相同, 块不同), 因此单独运行某类实验与
在 kind=all 中运行得到逐字节相同的输出.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from .bounds import BoundBudget, total_bound
from .coupling import coupled_run
from .distance import DistanceSeries, distance_curve, fit_rate
from .exceptions import ConfigError, HawkesSteinException, ReportWriteError
from .moments import moment_series
from .parallel import replicate
from .registry import ExperimentRegistry, build_registry, experiment
from .reports import (
    IBP_HEADER,
    ORTHOGONALITY_HEADER,
    write_bound_diagnostics,
    write_bounds,
    write_csv,
    write_distance,
    write_manifest,
    write_moments,
    write_ratefit,
    write_weighted_bounds,
)
from .rng import RandomState
from .simulation import simulate_hawkes, statistic_F, write_path_csv
from .timing import TimingMetrics
from .types import ExperimentKind, StatisticTag

if TYPE_CHECKING:
    from .config import ExperimentConfig
    from .kernels import Kernel
    from .marks import MarkDistribution

logger = logging.getLogger(__name__)

# 各子报告的随机块起点; 第 i 个 T 使用 起点 + i
BOUND_BLOCK = 1000
DISTANCE_F_BLOCK = 2000
DISTANCE_Y_BLOCK = 3000
IBP_BLOCK = 4000
ORTHOGONALITY_BLOCK = 4001
DUMP_BLOCK = 9000

# 一致性检验的容许倍数 (以合并标准误计)
CHECK_SIGMAS = 4.0

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


@dataclass
class RunContext:
    """一次运行中各执行函数共享的状态.

    Attributes:
        out_dir: 输出目录
        metrics: 各阶段耗时
        cache: 执行函数之间共享的中间结果
    """

    out_dir: Path
    metrics: TimingMetrics = field(default_factory=TimingMetrics)
    cache: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentResult:
    """一次运行的产物.

    Attributes:
        artifacts: 写出的文件 (相对 out_dir)
        manifest: manifest.json 路径
        timings: 各阶段耗时统计
    """

    artifacts: tuple[str, ...]
    manifest: Path
    timings: dict[str, Any]


# ===================== 执行函数 =====================


@experiment(ExperimentKind.MOMENTS, artifacts=("moments.csv",), order=0)
def run_moments(config: ExperimentConfig, context: RunContext) -> list[Path]:
    """在 [0, max T] 上按 moment_grid_step 输出精确矩."""
    end = config.T_grid[-1]
    grid = np.arange(0.0, end + 0.5 * config.moment_grid_step, config.moment_grid_step)
    reports = moment_series(config.kernel, config.mu, grid)
    return [write_moments(context.out_dir / "moments.csv", reports)]


@experiment(
    ExperimentKind.BOUND,
    artifacts=("bounds.csv", "bounds_diagnostics.csv", "weighted_bounds.csv"),
    order=1,
)
def run_bound(config: ExperimentConfig, context: RunContext) -> list[Path]:
    """每个 T 估计一次 Stein 界; 配置了权重时同时估计加权界."""
    budget = BoundBudget(config.n_paths, config.k_grid, config.workers, config.window)
    reports = []
    for i, T in enumerate(config.T_grid):
        rng = RandomState(config.seed, block=BOUND_BLOCK + i)
        reports.append(
            total_bound(
                config.kernel,
                config.mu,
                config.marks,
                T,
                budget,
                rng,
                weight=config.weight_for(T),
                gamma2=config.gamma2 if config.weight_levels is not None else None,
            )
        )
    written = [
        write_bounds(context.out_dir / "bounds.csv", reports),
        write_bound_diagnostics(context.out_dir / "bounds_diagnostics.csv", reports),
    ]
    weighted = [r.weighted for r in reports if r.weighted is not None]
    if weighted:
        written.append(write_weighted_bounds(context.out_dir / "weighted_bounds.csv", weighted))
    return written


def _distance_series(config: ExperimentConfig, context: RunContext) -> list[DistanceSeries]:
    cached = context.cache.get("distance")
    if cached is not None:
        return cached
    series = [
        distance_curve(
            config.kernel,
            config.mu,
            config.marks,
            config.T_grid,
            config.n_paths,
            tag,
            RandomState(config.seed, block=block),
            n_boot=config.n_boot,
            workers=config.workers,
            window=config.window,
        )
        for tag, block in ((StatisticTag.F, DISTANCE_F_BLOCK), (StatisticTag.Y, DISTANCE_Y_BLOCK))
    ]
    context.cache["distance"] = series
    return series


@experiment(ExperimentKind.DISTANCE, artifacts=("distance.csv",), order=2)
def run_distance(config: ExperimentConfig, context: RunContext) -> list[Path]:
    """F_T 与 Y_T 到各自 Gaussian 极限的经验 W₁."""
    return [write_distance(context.out_dir / "distance.csv", _distance_series(config, context))]


@experiment(ExperimentKind.RATE, artifacts=("distance.csv", "ratefit.csv"), order=3)
def run_rate(config: ExperimentConfig, context: RunContext) -> list[Path]:
    """距离曲线加 log-log 斜率拟合."""
    series = _distance_series(config, context)
    fits = [fit_rate(s) for s in series]
    for fit in fits:
        logger.info("rate fit %s: slope %.3f (r^2 %.3f)", fit.statistic_tag.value, fit.slope, fit.r_squared)
    return [
        write_distance(context.out_dir / "distance.csv", series),
        write_ratefit(context.out_dir / "ratefit.csv", fits),
    ]


def _ibp_replication(
    r: int, *, kernel: Kernel, mu: float, marks: MarkDistribution, T: float, rng: RandomState, window: float | None
) -> tuple[float, int]:
    path = simulate_hawkes(kernel, mu, marks, T, rng.for_replication(r), window=window)
    return statistic_F(path, kernel, mu, marks), path.count


def _orthogonality_replication(
    r: int,
    *,
    kernel: Kernel,
    mu: float,
    marks: MarkDistribution,
    T: float,
    K: int,
    rng: RandomState,
    window: float | None,
) -> float:
    stream = rng.for_replication(r)
    base = simulate_hawkes(kernel, mu, marks, T, stream, window=window)
    return coupled_run(base, kernel, mu, marks, K, stream, window=window).lambda_hatM() / T


@experiment(ExperimentKind.IBP_CHECK, artifacts=("ibp.csv", "orthogonality.csv"), order=4)
def run_ibp_check(config: ExperimentConfig, context: RunContext) -> list[Path]:
    """分部积分恒等式 E[F_T²] = ϑ²E[H_T]/T 与鞅正交性 E∫λM̂ = 0.

    使用 T_grid 中的第一个 T.
    """
    kernel, mu, marks = config.kernel, config.mu, config.marks
    T = config.T_grid[0]
    n = config.n_paths

    fn = partial(
        _ibp_replication,
        kernel=kernel,
        mu=mu,
        marks=marks,
        T=T,
        rng=RandomState(config.seed, block=IBP_BLOCK),
        window=config.window,
    )
    samples = replicate(fn, n, config.workers)
    f = np.array([s[0] for s in samples])
    counts = np.array([s[1] for s in samples], dtype=np.float64)
    lhs_values = f * f
    rhs_values = marks.theta2 * counts / T
    lhs, rhs = float(lhs_values.mean()), float(rhs_values.mean())
    combined_se = float(np.std(lhs_values - rhs_values, ddof=1) / math.sqrt(n))
    ibp_pass = abs(lhs - rhs) <= CHECK_SIGMAS * combined_se
    logger.info("IBP at T=%g: lhs %.5g rhs %.5g se %.2g pass=%s", T, lhs, rhs, combined_se, ibp_pass)

    fn_orth = partial(
        _orthogonality_replication,
        kernel=kernel,
        mu=mu,
        marks=marks,
        T=T,
        K=config.k_grid,
        rng=RandomState(config.seed, block=ORTHOGONALITY_BLOCK),
        window=config.window,
    )
    values = np.asarray(replicate(fn_orth, n, config.workers), dtype=np.float64)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n))
    # Zero 核时各值恰为 0
    orth_pass = abs(mean) <= CHECK_SIGMAS * se or (se == 0.0 and mean == 0.0)
    logger.info("orthogonality at T=%g: mean %.3g se %.2g pass=%s", T, mean, se, orth_pass)

    return [
        write_csv(context.out_dir / "ibp.csv", IBP_HEADER, [(lhs, rhs, combined_se, ibp_pass)]),
        write_csv(context.out_dir / "orthogonality.csv", ORTHOGONALITY_HEADER, [(mean, se, orth_pass)]),
    ]


def default_registry() -> ExperimentRegistry:
    """内置实验的注册表."""
    return build_registry(run_moments, run_bound, run_distance, run_rate, run_ibp_check)


# ===================== 编排 =====================


def write_dumped_paths(config: ExperimentConfig, out_dir: Path) -> list[Path]:
    """在最大的 T 上写出 config.dump_paths 条基础路径."""
    T = config.T_grid[-1]
    rng = RandomState(config.seed, block=DUMP_BLOCK)
    directory = out_dir / "paths"
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportWriteError(directory, e) from e
    written = []
    for r in range(config.dump_paths):
        path = simulate_hawkes(config.kernel, config.mu, config.marks, T, rng.for_replication(r), window=config.window)
        file = directory / f"path_{r:04d}.csv"
        write_path_csv(path, file)
        written.append(file)
    return written


def execute(config: ExperimentConfig, registry: ExperimentRegistry | None = None) -> ExperimentResult:
    """运行配置指定的实验并写出 manifest.

    Raises:
        HawkesSteinException: 任何子报告失败时(不写 manifest)
    """
    from . import __version__

    registry = registry if registry is not None else default_registry()
    context = RunContext(Path(config.out_dir))
    try:
        context.out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportWriteError(context.out_dir, e) from e

    logger.info("experiment %s: seed=%d, out_dir=%s", config.kind.value, config.seed, context.out_dir)
    artifacts: dict[str, None] = {}
    with context.metrics.time("total"):
        for kind in registry.plan(config.kind):
            runner = registry.resolve(kind)
            with context.metrics.time(kind.value) as watch:
                written = runner(config, context)
            logger.info("%s finished in %.2fs", kind.value, watch.elapsed_time)
            artifacts.update(dict.fromkeys(p.relative_to(context.out_dir).as_posix() for p in written))
        if config.dump_paths:
            dumped = write_dumped_paths(config, context.out_dir)
            artifacts.update(dict.fromkeys(p.relative_to(context.out_dir).as_posix() for p in dumped))

    names = tuple(sorted(artifacts))
    manifest = write_manifest(
        context.out_dir,
        config_hash=config.config_hash(),
        seed=config.seed,
        version=__version__,
        config=config.canonical(),
        artifacts=names,
    )
    elapsed = context.metrics.section_times["total"]
    logger.info("wrote %d artifacts and %s (%.2fs total)", len(names), manifest.name, elapsed)
    return ExperimentResult(names, manifest, context.metrics.get_stats())


def run_experiment(config: ExperimentConfig, registry: ExperimentRegistry | None = None) -> int:
    """运行实验并返回退出码.

    Returns:
        0 成功, 1 配置错误, 2 运行时不变量违例, 3 I/O 错误
    """
    try:
        execute(config, registry)
    except ConfigError as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except ReportWriteError as e:
        logger.error("%s", e)
        return EXIT_IO
    except HawkesSteinException as e:
        logger.error("%s", e)
        return EXIT_RUNTIME
    except OSError as e:
        logger.error("I/O failure: %s", e)
        return EXIT_IO
    return EXIT_OK
