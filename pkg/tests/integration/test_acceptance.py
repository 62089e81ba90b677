"""端到端验收测试.

这些测试运行完整预算的蒙特卡罗实验, 耗时较长,
可用 `pytest -m "not slow"` 跳过.
"""

from __future__ import annotations

import csv
import json
import math

import pytest

from hawkes_stein import (
    BoundBudget,
    ErlangKernel,
    ExponentialKernel,
    PointMassOne,
    RandomState,
    StatisticTag,
    ZeroKernel,
    distance_curve,
    fit_rate,
    total_bound,
)
from hawkes_stein.cli import main
from hawkes_stein.reports import sha256_file

pytestmark = [pytest.mark.integration, pytest.mark.slow]

HORIZONS = (25.0, 50.0, 100.0, 200.0, 400.0)
N_PATHS = 20_000
SLOPE_WINDOW = (-0.75, -0.25)


def read_rows(path) -> list[dict[str, str]]:
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class TestPoissonExactness:
    """零核: 总界恰为 1/√T, 经验距离不超过它."""

    @pytest.mark.parametrize("T", [25.0, 100.0, 400.0])
    def test_total_bound(self, T) -> None:
        report = total_bound(ZeroKernel(), 1.0, PointMassOne(), T, BoundBudget(100, 4), RandomState(1))
        assert report.total == pytest.approx(1.0 / math.sqrt(T), abs=1e-12)

    def test_distance_below_bound(self) -> None:
        horizons = (25.0, 100.0, 400.0)
        series = distance_curve(ZeroKernel(), 1.0, PointMassOne(), horizons, N_PATHS, StatisticTag.F, RandomState(2))
        for entry in series.entries:
            assert entry.d_hat <= 1.0 / math.sqrt(entry.T) + 2.0 * entry.se_boot


class TestBerryEsseenRate:
    """距离以约 T^{-1/2} 衰减."""

    @pytest.mark.parametrize("kernel", [ExponentialKernel(1.0, 2.0), ErlangKernel(1.0, 2.0)], ids=["exp", "erlang"])
    def test_F_slope(self, kernel) -> None:
        series = distance_curve(kernel, 1.0, PointMassOne(), HORIZONS, N_PATHS, StatisticTag.F, RandomState(3))
        fit = fit_rate(series)
        assert SLOPE_WINDOW[0] <= fit.slope <= SLOPE_WINDOW[1]
        assert fit.r_squared >= 0.8

    def test_modified_statistic(self) -> None:
        """测试 Y_T 对 γ² = 8 的距离递减, 斜率落在窗口内."""
        kernel = ExponentialKernel(1.0, 2.0)
        series = distance_curve(kernel, 1.0, PointMassOne(), HORIZONS, N_PATHS, StatisticTag.Y, RandomState(4))
        assert series.gamma2 == pytest.approx(8.0)
        distances = [e.d_hat for e in series.entries]
        assert distances[0] > distances[-1]
        assert SLOPE_WINDOW[0] <= fit_rate(series).slope <= SLOPE_WINDOW[1]


class TestBoundDominance:
    """总界不小于经验距离 (扣除两倍合并标准误)."""

    @pytest.mark.parametrize(
        "kernel", [ZeroKernel(), ExponentialKernel(1.0, 2.0), ErlangKernel(1.0, 2.0)], ids=["zero", "exp", "erlang"]
    )
    def test_dominance(self, kernel) -> None:
        marks = PointMassOne()
        horizons = (25.0, 100.0, 400.0)
        series = distance_curve(kernel, 1.0, marks, horizons, N_PATHS, StatisticTag.F, RandomState(5))
        budget = BoundBudget(n_outer=1000, k_grid=32)
        for i, entry in enumerate(series.entries):
            report = total_bound(kernel, 1.0, marks, entry.T, budget, RandomState(6, block=i))
            combined_se = math.hypot(report.total_se, entry.se_boot)
            assert report.total >= entry.d_hat - 2.0 * combined_se


class TestEndToEnd:
    """通过命令行运行完整实验."""

    def test_ibp_check(self, tmp_path) -> None:
        """测试 E[F_T²] = E[H_T]/T 与鞅正交性在 T = 50 处通过."""
        config = tmp_path / "ibp.ini"
        config.write_text(
            "[experiment]\nkind = ibp_check\nseed = 7\n"
            "[model]\nkernel = exponential\nalpha = 1\nbeta = 2\nmu = 1\n"
            f"[budget]\nn_paths = {N_PATHS}\nk_grid = 16\nT_grid = 50\n",
            encoding="utf-8",
        )
        out = tmp_path / "out"
        assert main(["run", str(config), "--out-dir", str(out)]) == 0
        assert read_rows(out / "ibp.csv")[0]["pass"] == "true"
        assert read_rows(out / "orthogonality.csv")[0]["pass"] == "true"

    def test_all_with_manifest(self, tmp_path) -> None:
        """测试 kind = all 写出全部产物, manifest 的哈希与文件一致."""
        config = tmp_path / "all.ini"
        config.write_text(
            "[experiment]\nkind = all\nseed = 42\n"
            "[model]\nkernel = erlang\nalpha = 1\nbeta = 2\nmu = 1\n"
            "[marks]\ndist = two_point\na = 2\nb = -1\np = 0.25\n"
            "[budget]\nn_paths = 500\nk_grid = 8\nT_grid = 5, 10, 20, 40\nn_boot = 20\n",
            encoding="utf-8",
        )
        out = tmp_path / "out"
        assert main(["run", str(config), "--out-dir", str(out)]) == 0
        payload = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert set(payload["artifacts"]) == {
            "bounds.csv",
            "bounds_diagnostics.csv",
            "distance.csv",
            "ibp.csv",
            "moments.csv",
            "orthogonality.csv",
            "ratefit.csv",
        }
        for name, digest in payload["artifacts"].items():
            assert sha256_file(out / name) == digest
