"""Multiscale correlation-matrix and eigenvalue dynamics of return panels."""

from .analysis import index_returns, one_factor_check, partition_by_sdu, partition_report, window_returns
from .eigen import EigenRecord, SduSeries, spectrum, to_sdu
from .errors import ConfigError, DataError, NumericalError, WavecorrError
from .ingest import (
    PricePanel,
    ReturnsPanel,
    SyntheticSpec,
    generate_regime_panel,
    generate_synthetic,
    load_prices,
    to_returns,
)
from .modwt import WaveletDecomposition, WaveletFilter, decompose, make_filter, max_level
from .portfolio import build_covariance, frontier_by_scale, min_variance_frontier
from .wavestats import (
    normalize_window,
    raw_correlation,
    wavelet_correlation_matrix,
    wavelet_covariance,
)
from .windows import DynamicsResult, WindowPlan, epps_summary, run_dynamics

__all__ = [
    "build_covariance",
    "ConfigError",
    "DataError",
    "decompose",
    "DynamicsResult",
    "EigenRecord",
    "epps_summary",
    "frontier_by_scale",
    "generate_regime_panel",
    "generate_synthetic",
    "index_returns",
    "load_prices",
    "make_filter",
    "max_level",
    "min_variance_frontier",
    "normalize_window",
    "NumericalError",
    "one_factor_check",
    "partition_by_sdu",
    "partition_report",
    "PricePanel",
    "raw_correlation",
    "ReturnsPanel",
    "run_dynamics",
    "SduSeries",
    "spectrum",
    "SyntheticSpec",
    "to_returns",
    "to_sdu",
    "WavecorrError",
    "wavelet_correlation_matrix",
    "wavelet_covariance",
    "WaveletDecomposition",
    "WaveletFilter",
    "window_returns",
    "WindowPlan",
]

__version__ = "0.1.0"
