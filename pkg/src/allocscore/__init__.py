"""Allocation-based evaluation of multivariate probabilistic forecasts."""

from .alloc import (
    Allocation,
    LossParams,
    MultiForecast,
    Outcome,
    SolverConfig,
    allocation_loss,
    expected_allocation_loss,
    oracle_loss,
    solve_allocation,
    unmet_needs,
)
from .dist import (
    DEFAULT_QUANTILE_LEVELS,
    Exponential,
    LogNormal,
    MarginalDistribution,
    Normal,
    PointMass,
    QuantileReconstructed,
    QuantileSet,
    from_quantiles,
)
from .score import (
    PointMassWeight,
    RankEntry,
    ScoreReport,
    TruncNormalWeights,
    UniformWeights,
    allocation_score,
    integrated_allocation_score,
    mean_wis,
    quantile_score,
    score_fixed_allocation,
    standardized_ranks,
    wis,
    wis_decomposition,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "LossParams",
    "MultiForecast",
    "Outcome",
    "SolverConfig",
    "allocation_loss",
    "expected_allocation_loss",
    "oracle_loss",
    "solve_allocation",
    "unmet_needs",
    "DEFAULT_QUANTILE_LEVELS",
    "Exponential",
    "LogNormal",
    "MarginalDistribution",
    "Normal",
    "PointMass",
    "QuantileReconstructed",
    "QuantileSet",
    "from_quantiles",
    "PointMassWeight",
    "RankEntry",
    "ScoreReport",
    "TruncNormalWeights",
    "UniformWeights",
    "allocation_score",
    "integrated_allocation_score",
    "mean_wis",
    "quantile_score",
    "score_fixed_allocation",
    "standardized_ranks",
    "wis",
    "wis_decomposition",
]
