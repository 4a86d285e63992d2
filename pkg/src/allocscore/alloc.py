"""Constrained resource allocation under a multivariate forecast.

Finds the allocation minimizing the forecast-expected unmet need subject
to a total-resource budget K. The optimum places every location at its
marginal quantile for a single shared probability level, clamped at zero;
the shared level is located by bisection on the constraint equation
sum_i max(0, quantile_i(tau)) = K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dist import MarginalDistribution
from .errors import (
    DimensionMismatch,
    InfeasibleConstraint,
    NoConvergence,
    UnboundedQuantile,
)

__all__ = [
    "MultiForecast",
    "Outcome",
    "Allocation",
    "LossParams",
    "SolverConfig",
    "allocation_loss",
    "unmet_needs",
    "expected_allocation_loss",
    "solve_allocation",
    "oracle_loss",
]


@dataclass(frozen=True)
class MultiForecast:
    """Ordered, location-labelled marginal predictive distributions."""

    locations: tuple
    marginals: tuple

    def __post_init__(self):
        locations = tuple(str(s) for s in self.locations)
        marginals = tuple(self.marginals)
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "marginals", marginals)
        if len(locations) != len(marginals):
            raise DimensionMismatch("locations and marginals differ in length")
        if len(locations) == 0:
            raise ValueError("at least one location is required")
        if len(set(locations)) != len(locations):
            raise ValueError("location identifiers must be unique")
        for m in marginals:
            if not isinstance(m, MarginalDistribution):
                raise TypeError(f"not a marginal distribution: {m!r}")

    def __len__(self):
        return len(self.locations)


@dataclass(frozen=True)
class Outcome:
    """Realized resource need per location, aligned to a MultiForecast."""

    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        for v in values:
            if not math.isfinite(v) or v < 0:
                raise ValueError("outcome values must be finite and nonnegative")


@dataclass(frozen=True)
class Allocation:
    """Nonnegative per-location amounts summing to the budget K."""

    amounts: tuple
    constraint: float
    shared_level: float | None = None

    def __post_init__(self):
        amounts = tuple(float(a) for a in self.amounts)
        object.__setattr__(self, "amounts", amounts)
        object.__setattr__(self, "constraint", float(self.constraint))
        if self.constraint <= 0:
            raise ValueError("constraint K must be positive")
        if any(a < 0 for a in amounts):
            raise ValueError("allocation amounts must be nonnegative")
        if abs(sum(amounts) - self.constraint) > 1e-6 * self.constraint:
            raise ValueError("allocation amounts must sum to K")


@dataclass(frozen=True)
class LossParams:
    """Loss per unit of unmet need, uniform across locations."""

    per_unit_loss: float = 1.0

    def __post_init__(self):
        if self.per_unit_loss <= 0:
            raise ValueError("per-unit loss must be positive")


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_iter <= 0:
            raise ValueError("solver tolerances and iteration budget must be positive")


def unmet_needs(x: Allocation, y: Outcome) -> tuple:
    """Per-location unmet need max(0, y_i - x_i)."""
    if len(x.amounts) != len(y.values):
        raise DimensionMismatch("allocation and outcome differ in length")
    return tuple(max(0.0, yi - xi) for xi, yi in zip(x.amounts, y.values))


def allocation_loss(x: Allocation, y: Outcome, loss: LossParams = LossParams()) -> float:
    """Total realized loss: L times the summed unmet need."""
    return loss.per_unit_loss * sum(unmet_needs(x, y))


def expected_allocation_loss(
    forecast: MultiForecast, x: Allocation, loss: LossParams = LossParams()
) -> float:
    """Forecast-expected loss of an allocation: L * sum_i E[(Y_i - x_i)+]."""
    if len(forecast) != len(x.amounts):
        raise DimensionMismatch("forecast and allocation differ in length")
    return loss.per_unit_loss * sum(
        m.expected_shortage(xi) for m, xi in zip(forecast.marginals, x.amounts)
    )


def oracle_loss(y: Outcome, K: float, loss: LossParams = LossParams()) -> float:
    """Loss of an allocator with perfect foreknowledge: L * max(0, sum(y) - K)."""
    if K <= 0:
        raise ValueError("K must be positive")
    return loss.per_unit_loss * max(0.0, sum(y.values) - K)


def _clamped_quantiles(forecast: MultiForecast, tau: float) -> list:
    return [max(0.0, m.quantile(tau)) for m in forecast.marginals]


def _saturated_allocation(forecast: MultiForecast, K: float, tau_cap: float) -> Allocation:
    """Allocate a budget beyond the quantiles representable at tau < 1.

    With an unbounded upper tail somewhere, any split of the surplus above
    the tau_cap quantiles has expected shortage within solver tolerance of
    the optimum; the surplus goes to the unbounded locations in proportion
    to their tau_cap quantiles. With only bounded supports the budget is
    genuinely infeasible.
    """
    unbounded = []
    for i, m in enumerate(forecast.marginals):
        try:
            m.quantile(1.0)
        except UnboundedQuantile:
            unbounded.append(i)
    if not unbounded:
        raise InfeasibleConstraint(
            f"budget K={K} exceeds the total supremum of the marginal supports"
        )
    base = _clamped_quantiles(forecast, tau_cap)
    residual = K - sum(base)
    weight = sum(base[i] for i in unbounded)
    amounts = list(base)
    for i in unbounded:
        share = base[i] / weight if weight > 0 else 1.0 / len(unbounded)
        amounts[i] += residual * share
    return Allocation(amounts=amounts, constraint=K, shared_level=tau_cap)


def solve_allocation(
    forecast: MultiForecast, K: float, cfg: SolverConfig = SolverConfig()
) -> Allocation:
    """Solve for the expected-loss-minimizing allocation at budget K.

    Bisects on the shared probability level until the bracket satisfies
    tau_hi < (1 + rel_tol) * tau_lo or tau_hi - tau_lo < abs_tol, then
    distributes any residual below K across locations whose quantiles
    jump over the converged level, proportionally to the jump sizes.
    """
    if K <= 0:
        raise ValueError("K must be positive")

    tau_lo = 0.0
    tau_hi = max(m.cdf(K) for m in forecast.marginals)
    tau_hi = min(max(tau_hi, 0.0), 1.0 - 1e-12)

    total_lo = sum(_clamped_quantiles(forecast, tau_lo))
    if total_lo >= K:
        # every location already demands its full floor; split the budget
        # proportionally to the floors
        floors = _clamped_quantiles(forecast, tau_lo)
        amounts = [K * f / total_lo for f in floors]
        return Allocation(amounts=amounts, constraint=K, shared_level=0.0)

    # expand the upper bracket until the total allocation reaches K
    while sum(_clamped_quantiles(forecast, tau_hi)) < K:
        if tau_hi >= 1.0 - 1e-12:
            return _saturated_allocation(forecast, K, tau_hi)
        tau_hi = min((1.0 + tau_hi) / 2.0, 1.0 - 1e-12)

    converged = False
    for _ in range(cfg.max_iter):
        if tau_hi < (1.0 + cfg.rel_tol) * tau_lo or tau_hi - tau_lo < cfg.abs_tol:
            converged = True
            break
        tau_mid = 0.5 * (tau_lo + tau_hi)
        if sum(_clamped_quantiles(forecast, tau_mid)) >= K:
            tau_hi = tau_mid
        else:
            tau_lo = tau_mid
    if not converged:
        raise NoConvergence(f"bisection did not converge in {cfg.max_iter} iterations")

    x_lo = _clamped_quantiles(forecast, tau_lo)
    x_hi = _clamped_quantiles(forecast, tau_hi)
    residual = K - sum(x_lo)
    jumps = [hi - lo for lo, hi in zip(x_lo, x_hi)]
    total_jump = sum(jumps)
    if residual > 0 and total_jump > 0:
        amounts = [lo + residual * j / total_jump for lo, j in zip(x_lo, jumps)]
    else:
        amounts = x_lo
    return Allocation(amounts=amounts, constraint=K, shared_level=tau_lo)
