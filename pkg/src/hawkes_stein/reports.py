"""报告输出模块.

CSV 使用逗号分隔, `.` 小数点, `\\n` 换行; 浮点数按 repr 输出,
保证同一构建下逐字节可复现. manifest.json 记录配置哈希, 种子,
库版本以及每个产物的 sha256.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any

from .exceptions import ReportWriteError

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from .bounds import BoundReport, WeightedBoundReport
    from .distance import DistanceSeries, RateFit
    from .moments import MomentReport

logger = logging.getLogger(__name__)

MOMENTS_HEADER = ("t", "mean_intensity", "mean_count", "second_moment")
BOUNDS_HEADER = (
    "T",
    "a11",
    "a12",
    "a12_se",
    "a13",
    "a13_se",
    "a21",
    "a22",
    "a22_se",
    "total",
    "n_outer",
    "k_grid",
    "seed",
)
BOUNDS_DIAGNOSTICS_HEADER = (
    "T",
    "a2",
    "a2_se",
    "a2_split",
    "total_se",
    "a13_bias",
    "a12_proof_bound",
    "a22_conditional",
    "a22_bound",
)
WEIGHTED_HEADER = ("T", "gamma2", "b1", "b1_se", "b2", "b2_se", "total", "total_se", "n_outer", "k_grid")
DISTANCE_HEADER = ("T", "n", "d_hat", "se_boot", "gamma2", "statistic")
RATEFIT_HEADER = ("statistic", "slope", "intercept", "r_squared")
IBP_HEADER = ("lhs", "rhs", "combined_se", "pass")
ORTHOGONALITY_HEADER = ("mean", "se", "pass")


def format_value(value: Any) -> str:
    """单元格文本: None 为空, 布尔为 true/false, 浮点按 repr."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """写出 CSV.

    Raises:
        ReportWriteError: 写入失败时
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
    except OSError as e:
        raise ReportWriteError(target, e) from e
    logger.debug("wrote %s", target)
    return target


def write_moments(path: str | Path, reports: Sequence[MomentReport]) -> Path:
    """moments.csv; 非 Markov 核的二阶矩列为空."""
    rows = ((float(r.t), r.mean_intensity, r.mean_count, r.second_moment_intensity) for r in reports)
    return write_csv(path, MOMENTS_HEADER, rows)


def write_bounds(path: str | Path, reports: Sequence[BoundReport]) -> Path:
    """bounds.csv."""
    rows = (
        (r.T, r.a11, r.a12, r.a12_se, r.a13, r.a13_se, r.a21, r.a22, r.a22_se, r.total, r.n_outer, r.k_grid, r.seed)
        for r in sorted(reports, key=lambda r: r.T)
    )
    return write_csv(path, BOUNDS_HEADER, rows)


def write_bound_diagnostics(path: str | Path, reports: Sequence[BoundReport]) -> Path:
    """bounds_diagnostics.csv: 直接形式 A₂, 分拆形式与各交叉检验量."""
    rows = (
        (r.T, r.a2, r.a2_se, r.a2_split, r.total_se, r.a13_bias, r.a12_proof_bound, r.a22_conditional, r.a22_bound)
        for r in sorted(reports, key=lambda r: r.T)
    )
    return write_csv(path, BOUNDS_DIAGNOSTICS_HEADER, rows)


def write_weighted_bounds(path: str | Path, reports: Sequence[WeightedBoundReport]) -> Path:
    """weighted_bounds.csv."""
    rows = (
        (r.T, r.gamma2, r.b1, r.b1_se, r.b2, r.b2_se, r.total, r.total_se, r.n_outer, r.k_grid)
        for r in sorted(reports, key=lambda r: r.T)
    )
    return write_csv(path, WEIGHTED_HEADER, rows)


def write_distance(path: str | Path, series: Sequence[DistanceSeries]) -> Path:
    """distance.csv, 可包含多个统计量."""
    rows = (
        (e.T, e.n, e.d_hat, e.se_boot, s.gamma2, s.statistic_tag)
        for s in series
        for e in sorted(s.entries, key=lambda e: e.T)
    )
    return write_csv(path, DISTANCE_HEADER, rows)


def write_ratefit(path: str | Path, fits: Sequence[RateFit]) -> Path:
    """ratefit.csv."""
    return write_csv(path, RATEFIT_HEADER, ((f.statistic_tag, f.slope, f.intercept, f.r_squared) for f in fits))


# ===================== manifest =====================


def canonical_json_bytes(obj: Any) -> bytes:
    """键有序, 带缩进的 JSON 字节串."""
    text = json.dumps(obj, sort_keys=True, ensure_ascii=True, indent=2, separators=(",", ": "))
    return (text + "\n").encode("utf-8")


def sha256_bytes(data: bytes) -> str:
    """字节串的 sha256."""
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    """文件内容的 sha256."""
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_dir: str | Path,
    *,
    config_hash: str,
    seed: int,
    version: str,
    config: dict[str, Any],
    artifacts: Sequence[str | Path],
) -> Path:
    """写出 manifest.json.

    Args:
        out_dir: 输出目录
        config_hash: 配置哈希
        seed: 主种子
        version: 库版本
        config: 规范化的配置
        artifacts: 已写出的产物(相对 out_dir 或绝对路径)

    Returns:
        manifest 路径

    Raises:
        ReportWriteError: 写入失败时
    """
    directory = Path(out_dir)
    target = directory / "manifest.json"
    try:
        files = {}
        for artifact in artifacts:
            file = Path(artifact)
            file = file if file.is_absolute() else directory / file
            files[file.relative_to(directory).as_posix()] = sha256_file(file)
        payload = {
            "config_hash": config_hash,
            "seed": seed,
            "version": version,
            "config": config,
            "artifacts": dict(sorted(files.items())),
        }
        target.write_bytes(canonical_json_bytes(payload))
    except (OSError, ValueError) as e:
        raise ReportWriteError(target, e) from e
    return target
