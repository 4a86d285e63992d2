"""Scores for multivariate probabilistic forecasts.

Allocation score (realized loss of the forecast-optimal allocation minus
the oracle's unavoidable loss), its integral over a distribution of
budget levels, quantile/WIS comparison scores, and standardized ranks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .alloc import (
    Allocation,
    LossParams,
    MultiForecast,
    Outcome,
    SolverConfig,
    allocation_loss,
    oracle_loss,
    solve_allocation,
    unmet_needs,
)
from .dist import QuantileSet
from .errors import AsymmetricLevels, DimensionMismatch, InfeasibleAllocation

__all__ = [
    "LocationRecord",
    "ScoreReport",
    "UniformWeights",
    "TruncNormalWeights",
    "PointMassWeight",
    "RankEntry",
    "allocation_score",
    "score_fixed_allocation",
    "integrated_allocation_score",
    "quantile_score",
    "wis",
    "mean_wis",
    "wis_decomposition",
    "standardized_ranks",
]


@dataclass(frozen=True)
class LocationRecord:
    location: str
    allocated: float
    observed: float
    unmet: float


@dataclass(frozen=True)
class ScoreReport:
    """Scores for one (forecast, outcome, K) triple.

    ``allocation_score`` is the oracle-adjusted score raw - oracle; it is
    nonnegative for every feasible allocation. ``shared_level`` is None
    for allocations not derived from a forecast. ``model`` and
    ``target_date`` are optional labels used by file I/O and the CLI.
    """

    raw_score: float
    oracle_loss: float
    allocation_score: float
    shared_level: float | None
    per_location: tuple
    K: float
    L: float
    model: str | None = None
    target_date: str | None = None


def allocation_score(
    forecast: MultiForecast,
    y: Outcome,
    K: float,
    loss: LossParams = LossParams(),
    cfg: SolverConfig = SolverConfig(),
    model: str | None = None,
    target_date: str | None = None,
) -> ScoreReport:
    """Solve the allocation problem for the forecast and score the result."""
    if len(forecast) != len(y.values):
        raise DimensionMismatch("forecast and outcome differ in length")
    x = solve_allocation(forecast, K, cfg)
    unmet = unmet_needs(x, y)
    raw = loss.per_unit_loss * sum(unmet)
    oracle = oracle_loss(y, K, loss)
    per_loc = tuple(
        LocationRecord(location=loc, allocated=a, observed=o, unmet=u)
        for loc, a, o, u in zip(forecast.locations, x.amounts, y.values, unmet)
    )
    return ScoreReport(
        raw_score=raw,
        oracle_loss=oracle,
        allocation_score=max(0.0, raw - oracle),
        shared_level=x.shared_level,
        per_location=per_loc,
        K=float(K),
        L=loss.per_unit_loss,
        model=model,
        target_date=target_date,
    )


def score_fixed_allocation(
    x: Allocation,
    y: Outcome,
    K: float,
    loss: LossParams = LossParams(),
    locations: tuple | None = None,
    model: str | None = None,
    target_date: str | None = None,
) -> ScoreReport:
    """Score an externally supplied allocation (e.g. a per-capita benchmark)."""
    if any(a < 0 for a in x.amounts) or abs(sum(x.amounts) - K) > 1e-6 * K:
        raise InfeasibleAllocation("allocation is not feasible for the given K")
    if len(x.amounts) != len(y.values):
        raise DimensionMismatch("allocation and outcome differ in length")
    unmet = unmet_needs(x, y)
    raw = loss.per_unit_loss * sum(unmet)
    oracle = oracle_loss(y, K, loss)
    locs = locations if locations is not None else tuple(
        str(i) for i in range(len(x.amounts))
    )
    per_loc = tuple(
        LocationRecord(location=loc, allocated=a, observed=o, unmet=u)
        for loc, a, o, u in zip(locs, x.amounts, y.values, unmet)
    )
    return ScoreReport(
        raw_score=raw,
        oracle_loss=oracle,
        allocation_score=max(0.0, raw - oracle),
        shared_level=None,
        per_location=per_loc,
        K=float(K),
        L=loss.per_unit_loss,
        model=model,
        target_date=target_date,
    )


# -- weighting over budget levels -------------------------------------------


@dataclass(frozen=True)
class UniformWeights:
    """Equal weight on a grid of budget levels from k_min to k_max."""

    k_min: float
    k_max: float
    grid_step: float = 200.0

    def __post_init__(self):
        if self.k_min >= self.k_max:
            raise ValueError("k_min must be below k_max")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")

    def grid(self):
        ks = np.arange(self.k_min, self.k_max + 1e-9 * self.grid_step, self.grid_step)
        weights = np.full(len(ks), 1.0 / len(ks))
        return ks, weights


@dataclass(frozen=True)
class TruncNormalWeights:
    """Weights proportional to a normal density truncated to [lower, upper]."""

    center: float
    sd: float
    lower: float
    upper: float
    grid_step: float = 200.0

    def __post_init__(self):
        if self.sd <= 0:
            raise ValueError("sd must be positive")
        if self.lower >= self.upper:
            raise ValueError("lower must be below upper")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")

    def grid(self):
        ks = np.arange(self.lower, self.upper + 1e-9 * self.grid_step, self.grid_step)
        weights = norm.pdf(ks, loc=self.center, scale=self.sd)
        weights = weights / weights.sum()
        return ks, weights


@dataclass(frozen=True)
class PointMassWeight:
    """Degenerate weighting: all mass on a single budget level."""

    k: float

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")

    def grid(self):
        return np.array([self.k]), np.array([1.0])


def integrated_allocation_score(
    forecast: MultiForecast,
    y: Outcome,
    weights,
    loss: LossParams = LossParams(),
    cfg: SolverConfig = SolverConfig(),
) -> float:
    """Weighted average of the allocation score over a grid of budget levels."""
    ks, ws = weights.grid()
    total = 0.0
    for k, w in zip(ks, ws):
        total += w * allocation_score(forecast, y, float(k), loss, cfg).allocation_score
    return total


# -- quantile score and WIS ---------------------------------------------------


def quantile_score(q: float, tau: float, y: float) -> float:
    """Pinball loss 2 * (1{y <= q} - tau) * (q - y)."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    indicator = 1.0 if y <= q else 0.0
    return 2.0 * (indicator - tau) * (q - y)


def wis(q: QuantileSet, y: float) -> float:
    """Equal-weight mean of the quantile scores across all supplied levels."""
    scores = [quantile_score(v, t, y) for t, v in zip(q.levels, q.values)]
    return sum(scores) / len(scores)


def mean_wis(forecasts: dict, y: Outcome, locations: tuple) -> float:
    """Arithmetic mean of per-location WIS values.

    ``forecasts`` maps location id to a QuantileSet, aligned with
    ``locations`` and the outcome vector.
    """
    if len(locations) != len(y.values):
        raise DimensionMismatch("locations and outcome differ in length")
    missing = [loc for loc in locations if loc not in forecasts]
    if missing:
        raise DimensionMismatch(f"no quantile set for locations: {missing}")
    values = [wis(forecasts[loc], yi) for loc, yi in zip(locations, y.values)]
    return sum(values) / len(values)


def wis_decomposition(q: QuantileSet, y: float) -> tuple:
    """Split the WIS into (dispersion, underprediction, overprediction).

    Requires the levels to form symmetric pairs (tau, 1 - tau) around a
    median at 0.5. The three nonnegative components sum to wis(q, y).
    """
    levels = list(q.levels)
    values = list(q.values)
    n = len(levels)
    if n % 2 == 0:
        raise AsymmetricLevels("an odd number of levels including a median is required")
    mid = n // 2
    if abs(levels[mid] - 0.5) > 1e-9:
        raise AsymmetricLevels("central level must be 0.5")
    for i in range(mid):
        if abs(levels[i] + levels[n - 1 - i] - 1.0) > 1e-9:
            raise AsymmetricLevels(
                f"levels {levels[i]} and {levels[n - 1 - i]} are not symmetric"
            )

    dispersion = 0.0
    under = 0.0
    over = 0.0
    for i in range(mid):
        lo, hi = values[i], values[n - 1 - i]
        alpha = 2.0 * levels[i]
        dispersion += alpha * (hi - lo)
        over += 2.0 * max(0.0, lo - y)
        under += 2.0 * max(0.0, y - hi)
    m = values[mid]
    if m >= y:
        over += m - y
    else:
        under += y - m
    return dispersion / n, under / n, over / n


# -- ranks --------------------------------------------------------------------


@dataclass(frozen=True)
class RankEntry:
    model: str
    score: float
    standardized_rank: float


def standardized_ranks(scores) -> tuple:
    """Map (model, score) pairs to standardized ranks in [0, 1].

    Lower scores are better; 1.0 is the best rank and 0.0 the worst.
    Tied scores all receive the better (higher) rank.
    """
    entries = [(str(m), float(s)) for m, s in scores]
    if not entries:
        raise ValueError("at least one entry is required")
    n = len(entries)
    out = []
    for model, s in entries:
        rank = 1 + sum(1 for _, other in entries if other < s)
        std = 1.0 if n == 1 else (n - rank) / (n - 1)
        out.append(RankEntry(model=model, score=s, standardized_rank=std))
    return tuple(out)
