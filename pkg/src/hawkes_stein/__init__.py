"""hawkes-stein - 复合 Hawkes 过程模拟与 Stein-Malliavin 界的数值校验.

主要功能:
  - 指数, Erlang, 零与列表激励核, 精确或数值的预解核 ψ
  - 局部上界稀疏化模拟, 指数核的精确逐事件模拟
  - 插点平移过程的耦合模拟与加点导数
  - 精确一阶矩与 Markov 核的二阶矩 ODE
  - Wasserstein 界各项的嵌套 Monte Carlo 估计
  - 到 Gaussian 极限的经验 W₁ 与收敛速率拟合
  - 配置驱动, 可复现的实验命令行

快速开始:

    >>> from hawkes_stein import ExponentialKernel, PointMassOne, RandomState, simulate_hawkes, statistic_F
    >>>
    >>> kernel = ExponentialKernel(alpha=1.0, beta=2.0)
    >>> path = simulate_hawkes(kernel, 1.0, PointMassOne(), 100.0, RandomState(seed=7))
    >>> value = statistic_F(path, kernel, 1.0, PointMassOne())
"""

from .bounds import (
    A2Estimate,
    BoundBudget,
    BoundReport,
    WeightedBoundReport,
    WeightFunction,
    a12_proof_bound,
    a22_conditional,
    a22_conditional_bound,
    estimate_a2,
    estimate_a11,
    estimate_a12,
    estimate_a13,
    total_bound,
    weighted_bound,
)
from .config import ExperimentConfig, load_config, parse_config
from .coupling import (
    CoupledRun,
    ShiftPath,
    coupled_run,
    lambda_hatM_integral,
    malliavin_derivative,
    resimulate_with_atom,
    shift_from_stream,
    simulate_shift,
)
from .distance import (
    DistanceEntry,
    DistanceSeries,
    RateFit,
    bootstrap_se,
    distance_curve,
    empirical_w1_to_gaussian,
    fit_rate,
    w1_floor,
)
from .exceptions import (
    ConfigError,
    ConfigIssue,
    ConstructionError,
    CouplingError,
    DomainError,
    ExperimentNotFoundError,
    HawkesSteinException,
    MajorantViolationError,
    RegistrationError,
    ReportWriteError,
    StabilityError,
    UnsupportedKernelError,
)
from .harness import ExperimentResult, default_registry, execute, run_experiment
from .kernels import (
    ErlangKernel,
    ExponentialKernel,
    Kernel,
    TabulatedKernel,
    ZeroKernel,
    load_table,
    make_kernel,
    phi_eval,
    phi_l1,
    psi_eval,
    psi_integral,
    psi_l1,
)
from .marks import (
    Empirical,
    GaussianMarks,
    LognormalMarks,
    MarkDistribution,
    MarkMoments,
    PointMassOne,
    TwoPoint,
    make_marks,
    mark_moments,
    sample_mark,
)
from .moments import (
    AsymptoticConstants,
    MomentReport,
    asymptotic_constants,
    expected_aux,
    expected_count,
    expected_intensity,
    moment_series,
    second_moment_ode,
    stationary_second_moment,
)
from .registry import ExperimentRegistry, experiment
from .rng import RandomState, stream_index
from .simulation import (
    HawkesPath,
    PoissonCandidateStream,
    aux_xi,
    compensator,
    intensity_at,
    intensity_terminal,
    simulate_hawkes,
    simulate_hawkes_markov,
    solve_from_stream,
    statistic_F,
    statistic_weighted,
    statistic_Y,
    write_path_csv,
)
from .timing import Stopwatch, TimingMetrics
from .types import ExperimentKind, KernelKind, MarkKind, StatisticTag

__version__ = "0.1.0"

__all__ = [
    # Bounds
    "A2Estimate",
    "AsymptoticConstants",
    "BoundBudget",
    "BoundReport",
    # Exceptions
    "ConfigError",
    "ConfigIssue",
    "ConstructionError",
    "CoupledRun",
    "CouplingError",
    "DistanceEntry",
    "DistanceSeries",
    "DomainError",
    "Empirical",
    "ErlangKernel",
    # Configuration and harness
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentNotFoundError",
    "ExperimentRegistry",
    "ExperimentResult",
    # Kernels
    "ExponentialKernel",
    "GaussianMarks",
    "HawkesPath",
    "HawkesSteinException",
    "Kernel",
    "KernelKind",
    "LognormalMarks",
    "MajorantViolationError",
    "MarkDistribution",
    "MarkKind",
    "MarkMoments",
    "MomentReport",
    "PointMassOne",
    "PoissonCandidateStream",
    "RandomState",
    "RateFit",
    "RegistrationError",
    "ReportWriteError",
    "ShiftPath",
    "StabilityError",
    "StatisticTag",
    "Stopwatch",
    "TabulatedKernel",
    "TimingMetrics",
    "TwoPoint",
    "UnsupportedKernelError",
    "WeightFunction",
    "WeightedBoundReport",
    "ZeroKernel",
    "__version__",
    "a12_proof_bound",
    "a22_conditional",
    "a22_conditional_bound",
    "asymptotic_constants",
    "aux_xi",
    "bootstrap_se",
    "compensator",
    "coupled_run",
    "default_registry",
    "distance_curve",
    "empirical_w1_to_gaussian",
    "estimate_a2",
    "estimate_a11",
    "estimate_a12",
    "estimate_a13",
    "execute",
    "expected_aux",
    "expected_count",
    "expected_intensity",
    "experiment",
    "fit_rate",
    "intensity_at",
    "intensity_terminal",
    "lambda_hatM_integral",
    "load_config",
    "load_table",
    "make_kernel",
    "make_marks",
    "malliavin_derivative",
    "mark_moments",
    "moment_series",
    "parse_config",
    "phi_eval",
    "phi_l1",
    "psi_eval",
    "psi_integral",
    "psi_l1",
    "resimulate_with_atom",
    "run_experiment",
    "sample_mark",
    "second_moment_ode",
    "shift_from_stream",
    "simulate_hawkes",
    "simulate_hawkes_markov",
    "simulate_shift",
    "solve_from_stream",
    "stationary_second_moment",
    "statistic_F",
    "statistic_Y",
    "statistic_weighted",
    "stream_index",
    "total_bound",
    "w1_floor",
    "weighted_bound",
    "write_path_csv",
]
