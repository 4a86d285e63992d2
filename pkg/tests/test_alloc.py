import math

import numpy as np
import pytest

from allocscore import (
    Allocation,
    Exponential,
    LogNormal,
    LossParams,
    MultiForecast,
    Normal,
    Outcome,
    SolverConfig,
    allocation_loss,
    expected_allocation_loss,
    from_quantiles,
    oracle_loss,
    solve_allocation,
    unmet_needs,
)
from allocscore.dist import MarginalDistribution
from allocscore.errors import DimensionMismatch, InfeasibleConstraint

from conftest import default_levels_quantiles


def alloc(amounts, K):
    return Allocation(amounts=tuple(amounts), constraint=K)


class TestLosses:
    def test_example1_k5_loss(self, example1_outcome):
        assert allocation_loss(alloc((1, 4), 5), example1_outcome) == 6.0

    def test_example1_k10_loss(self, example1_outcome):
        assert allocation_loss(alloc((2, 8), 10), example1_outcome) == 2.0

    def test_exact_match_has_zero_loss(self):
        y = Outcome((3.0, 7.0))
        assert allocation_loss(alloc((3, 7), 10), y, LossParams(2.5)) == 0.0

    def test_per_location_terms(self, example1_outcome):
        assert unmet_needs(alloc((1, 4), 5), example1_outcome) == (0.0, 6.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            allocation_loss(alloc((1, 4), 5), Outcome((1.0, 2.0, 3.0)))

    def test_loss_scales_with_l(self, example1_outcome):
        assert allocation_loss(alloc((1, 4), 5), example1_outcome, LossParams(3.0)) == 18.0


class TestExpectedLoss:
    def test_example1_closed_form(self, example1_forecast):
        got = expected_allocation_loss(example1_forecast, alloc((1, 4), 5))
        assert got == pytest.approx(5.0 * math.exp(-1.0), abs=1e-12)

    def test_vanishes_for_huge_allocations(self, example1_forecast):
        got = expected_allocation_loss(example1_forecast, alloc((500, 500), 1000))
        assert got == pytest.approx(0.0, abs=1e-12)

    def test_single_location_at_zero_floor(self):
        f = MultiForecast(("a",), (Exponential(3.0),))
        # x = K but shortage evaluated at tiny x approaches the mean
        assert f.marginals[0].expected_shortage(0.0) == pytest.approx(3.0)


class TestOracle:
    def test_example1_k5(self, example1_outcome):
        assert oracle_loss(example1_outcome, 5.0) == 6.0

    def test_example1_k10(self, example1_outcome):
        assert oracle_loss(example1_outcome, 10.0) == 1.0

    def test_zero_when_budget_covers_need(self):
        assert oracle_loss(Outcome((1.0, 2.0)), 10.0) == 0.0


class TestSolver:
    def test_example1_k5(self, example1_forecast):
        x = solve_allocation(example1_forecast, 5.0)
        assert x.amounts == pytest.approx((1.0, 4.0), abs=1e-6)
        assert x.shared_level == pytest.approx(1.0 - math.exp(-1.0), abs=1e-9)

    def test_example1_k10(self, example1_forecast):
        x = solve_allocation(example1_forecast, 10.0)
        assert x.amounts == pytest.approx((2.0, 8.0), abs=1e-6)

    def test_example2_same_allocations(self, example2_forecast):
        x = solve_allocation(example2_forecast, 10.0)
        assert x.amounts == pytest.approx((2.0, 8.0), abs=1e-6)

    def test_identical_marginals_split_equally(self):
        f = MultiForecast(("a", "b", "c"), tuple(LogNormal(1.0, 0.5) for _ in range(3)))
        x = solve_allocation(f, 9.0)
        assert x.amounts == pytest.approx((3.0, 3.0, 3.0), abs=1e-6)

    def test_feasibility(self, example1_forecast):
        for K in [0.5, 5.0, 42.0, 1234.5]:
            x = solve_allocation(example1_forecast, K)
            assert all(a >= 0 for a in x.amounts)
            assert abs(sum(x.amounts) - K) <= 1e-6 * K

    def test_shared_level_characterization(self):
        f = MultiForecast(
            ("a", "b", "c"),
            (Exponential(2.0), LogNormal(0.5, 0.8), Normal(5.0, 1.0)),
        )
        x = solve_allocation(f, 12.0)
        cdfs = [m.cdf(a) for m, a in zip(f.marginals, x.amounts) if a > 0]
        assert max(cdfs) - min(cdfs) <= 1e-4

    def test_exponential_proportionality(self):
        scales = (1.5, 2.5, 6.0)
        f = MultiForecast(("a", "b", "c"), tuple(Exponential(s) for s in scales))
        x = solve_allocation(f, 20.0)
        expected = tuple(20.0 * s / sum(scales) for s in scales)
        assert x.amounts == pytest.approx(expected, rel=1e-6)

    def test_monotone_in_k(self, example1_forecast):
        prev = (0.0, 0.0)
        for K in [1.0, 2.0, 5.0, 10.0, 50.0]:
            x = solve_allocation(example1_forecast, K)
            assert all(a >= p - 1e-9 for a, p in zip(x.amounts, prev))
            prev = x.amounts

    def test_brute_force_optimality_two_locations(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            f = MultiForecast(
                ("a", "b"),
                (Exponential(rng.uniform(0.5, 5.0)), LogNormal(rng.uniform(0, 1), 0.7)),
            )
            K = rng.uniform(2.0, 20.0)
            x = solve_allocation(f, K)
            solver_loss = expected_allocation_loss(f, x)
            x1 = np.linspace(0.0, K, 10_001)
            grid = f.marginals[0].expected_shortage(x1) + f.marginals[1].expected_shortage(K - x1)
            assert solver_loss <= grid.min() + 1e-4 * K

    def test_oracle_bound(self, example1_forecast):
        rng = np.random.default_rng(11)
        for _ in range(50):
            y = Outcome(tuple(rng.uniform(0, 20, size=2)))
            K = rng.uniform(1.0, 30.0)
            x = solve_allocation(example1_forecast, K)
            assert allocation_loss(x, y) >= oracle_loss(y, K) - 1e-9

    def test_reconstructed_marginals(self):
        f = MultiForecast(
            ("a", "b"),
            (
                from_quantiles(default_levels_quantiles(Exponential(1.0))),
                from_quantiles(default_levels_quantiles(Exponential(4.0))),
            ),
        )
        x = solve_allocation(f, 5.0)
        assert x.amounts == pytest.approx((1.0, 4.0), abs=5e-3)
        assert abs(sum(x.amounts) - 5.0) <= 1e-6 * 5.0

    def test_point_mass_residual_distribution(self):
        from allocscore import QuantileSet

        atom = from_quantiles(QuantileSet((0.1, 0.6, 0.9), (4.0, 4.0, 9.0)))
        f = MultiForecast(("a", "b"), (atom, Exponential(1.0)))
        # K lands inside the atom's jump at tau = 0.1: the residual rule
        # must still return an exactly feasible allocation
        x = solve_allocation(f, 4.0)
        assert abs(sum(x.amounts) - 4.0) <= 1e-6 * 4.0
        assert all(a >= 0 for a in x.amounts)

    def test_rejects_nonpositive_k(self, example1_forecast):
        with pytest.raises(ValueError):
            solve_allocation(example1_forecast, 0.0)


class _BoundedUniform(MarginalDistribution):
    # Uniform(0, b): bounded support, used to exercise infeasibility
    def __init__(self, b):
        self.b = b

    def cdf(self, x):
        return min(1.0, max(0.0, x / self.b))

    def quantile(self, tau):
        if tau >= 1.0:
            return self.b
        return self.b * tau

    def expected_shortage(self, x):
        if x >= self.b:
            return 0.0
        return (self.b - x) ** 2 / (2 * self.b)


class TestInfeasible:
    def test_budget_above_total_support(self):
        f = MultiForecast(("a", "b"), (_BoundedUniform(1.0), _BoundedUniform(2.0)))
        with pytest.raises(InfeasibleConstraint):
            solve_allocation(f, 4.0)

    def test_budget_within_support_is_fine(self):
        f = MultiForecast(("a", "b"), (_BoundedUniform(1.0), _BoundedUniform(2.0)))
        x = solve_allocation(f, 1.5)
        assert abs(sum(x.amounts) - 1.5) <= 1e-6 * 1.5


class TestValidation:
    def test_allocation_must_sum_to_k(self):
        with pytest.raises(ValueError):
            Allocation(amounts=(1.0, 1.0), constraint=5.0)

    def test_allocation_rejects_negative_amounts(self):
        with pytest.raises(ValueError):
            Allocation(amounts=(-1.0, 6.0), constraint=5.0)

    def test_outcome_rejects_negative_values(self):
        with pytest.raises(ValueError):
            Outcome((-1.0, 2.0))

    def test_duplicate_locations_rejected(self):
        with pytest.raises(ValueError):
            MultiForecast(("a", "a"), (Exponential(1.0), Exponential(2.0)))
