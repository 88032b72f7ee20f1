"""Semigroup-adjusted realized covariation for functional data.

Estimates the quadratic covariation of the latent driver of a stochastic
transport equation from discrete space-time samples, with truncation rules
that separate the continuous part from jumps, exact simulators for the
benchmark models, and a deterministic Monte Carlo harness.
"""

from ._validation import ConfigError, DegenerateSpectrumError, NumericError
from .analysis import (
    DriverFPCA,
    RateFit,
    d_explained,
    fit_power_law,
    fpca_basis,
    rel_err,
)
from .covariation import (
    KEEP_CHOICES,
    CovariationEstimator,
    EstimatorSpec,
    long_span_estimate,
    realized_covariation,
)
from .increments import (
    ADJUSTED,
    PLAIN,
    IncrementSet,
    adjusted_increments,
    plain_increments,
)
from .kernels import (
    KERNEL_NAMES,
    SpatialGrid,
    kernel_matrix,
    mercer_partial_sum,
    mercer_reference,
    unit_grid,
)
from .linalg import EigenPairs, cholesky_psd, frobenius_distance, sym_eigen
from .montecarlo import (
    D_TARGET,
    ESTIMATOR_NAMES,
    MCResult,
    RunRecord,
    ScenarioConfig,
    SummaryRow,
    emit_runs,
    emit_table,
    estimator_spec,
    heidih_sweep,
    load_config,
    rate_sweep,
    run_monte_carlo,
    scenario_metadata,
    summarize,
    table1_scenarios,
)
from .simulate import (
    GENERATOR_ID,
    STREAM_RULE,
    HeidihConfig,
    JumpRecord,
    SimConfig,
    noise_cholesky,
    ou_transition,
    run_stream_seed,
    simulate_field,
    simulate_heidih_field,
)
from .truncation import (
    MahalanobisRule,
    NormThreshold,
    TruncationReport,
    mahalanobis_distance,
    select_flags,
)

__version__ = "0.1.0"

__all__ = [
    "ADJUSTED",
    "PLAIN",
    "KEEP_CHOICES",
    "KERNEL_NAMES",
    "ESTIMATOR_NAMES",
    "D_TARGET",
    "GENERATOR_ID",
    "STREAM_RULE",
    "ConfigError",
    "NumericError",
    "DegenerateSpectrumError",
    "SpatialGrid",
    "unit_grid",
    "kernel_matrix",
    "mercer_reference",
    "mercer_partial_sum",
    "EigenPairs",
    "sym_eigen",
    "cholesky_psd",
    "frobenius_distance",
    "IncrementSet",
    "adjusted_increments",
    "plain_increments",
    "NormThreshold",
    "MahalanobisRule",
    "TruncationReport",
    "mahalanobis_distance",
    "select_flags",
    "EstimatorSpec",
    "realized_covariation",
    "long_span_estimate",
    "CovariationEstimator",
    "rel_err",
    "d_explained",
    "fpca_basis",
    "DriverFPCA",
    "RateFit",
    "fit_power_law",
    "SimConfig",
    "JumpRecord",
    "HeidihConfig",
    "run_stream_seed",
    "noise_cholesky",
    "simulate_field",
    "ou_transition",
    "simulate_heidih_field",
    "ScenarioConfig",
    "RunRecord",
    "MCResult",
    "SummaryRow",
    "estimator_spec",
    "run_monte_carlo",
    "summarize",
    "emit_runs",
    "emit_table",
    "scenario_metadata",
    "table1_scenarios",
    "rate_sweep",
    "heidih_sweep",
    "load_config",
    "__version__",
]
