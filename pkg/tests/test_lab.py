import numpy as np
import pytest

from allocscore import Exponential, LogNormal, MultiForecast, solve_allocation
from allocscore.lab import (
    mc_propriety,
    posthoc_impropriety_demo,
    reconstructed_from,
    sample_outcomes,
)


def exp_forecast(scales):
    return MultiForecast(
        tuple(str(i + 1) for i in range(len(scales))),
        tuple(Exponential(s) for s in scales),
    )


class TestMcPropriety:
    def test_self_comparison_is_exactly_equal(self):
        f = exp_forecast([1.0, 4.0])
        result = mc_propriety(f, f, K=5.0, n=2_000, seed=1)
        assert result.mean_self == result.mean_other
        assert result.verdict == "consistent"

    def test_swapped_scales_are_worse(self):
        f = exp_forecast([1.0, 4.0])
        g = exp_forecast([4.0, 1.0])
        result = mc_propriety(f, g, K=5.0, n=10_000, seed=7)
        assert result.verdict == "consistent"
        assert result.mean_self < result.mean_other

    def test_scaled_forecast_gives_identical_scores(self):
        f = exp_forecast([1.0, 4.0])
        g = exp_forecast([2.0, 8.0])
        result = mc_propriety(f, g, K=5.0, n=2_000, seed=3)
        # scale-proportional forecasts share the allocation, so the paired
        # score difference is identically zero
        assert result.mean_self == pytest.approx(result.mean_other, abs=1e-9)
        assert result.se == pytest.approx(0.0, abs=1e-9)

    def test_identical_seeds_identical_results(self):
        f = exp_forecast([1.0, 4.0])
        g = exp_forecast([3.0, 2.0])
        a = mc_propriety(f, g, K=6.0, n=1_000, seed=11)
        b = mc_propriety(f, g, K=6.0, n=1_000, seed=11)
        assert a == b

    def test_different_seeds_differ(self):
        f = exp_forecast([1.0, 4.0])
        g = exp_forecast([3.0, 2.0])
        a = mc_propriety(f, g, K=6.0, n=1_000, seed=1)
        b = mc_propriety(f, g, K=6.0, n=1_000, seed=2)
        assert a.mean_self != b.mean_self


class TestSampling:
    def test_shape_and_determinism(self):
        f = exp_forecast([1.0, 4.0, 2.0])
        ys = sample_outcomes(f, 500, seed=4)
        assert ys.shape == (500, 3)
        assert np.all(ys >= 0)
        assert np.array_equal(ys, sample_outcomes(f, 500, seed=4))

    def test_marginal_means_roughly_match(self):
        f = exp_forecast([1.0, 4.0])
        ys = sample_outcomes(f, 50_000, seed=8)
        assert ys[:, 0].mean() == pytest.approx(1.0, rel=0.05)
        assert ys[:, 1].mean() == pytest.approx(4.0, rel=0.05)


class TestImpropriety:
    def lognormal_forecast(self):
        # distinct sigmas: with equal shape parameters the marginals are
        # scale multiples of each other and the allocation is invariant to
        # any shape-preserving reconstruction error
        return MultiForecast(("1", "2"), (LogNormal(0.0, 0.6), LogNormal(1.0, 1.2)))

    def test_interior_budget_small_gap(self):
        f = self.lognormal_forecast()
        # shared level well inside the supplied 23 levels
        k_mid = sum(m.quantile(0.6) for m in f.marginals)
        report = posthoc_impropriety_demo(f, K=k_mid, n=500, seed=0)
        assert report["max_abs_allocation_gap"] < 0.05 * k_mid

    def test_tail_budget_large_gap(self):
        f = self.lognormal_forecast()
        # shared level beyond the 0.99 level: normal-tail extrapolation
        # diverges from the true lognormal quantiles
        k_tail = sum(m.quantile(0.999) for m in f.marginals)
        report = posthoc_impropriety_demo(f, K=k_tail, n=500, seed=0)
        assert report["shared_level_true"] > 0.99
        assert report["max_abs_allocation_gap"] > 0.1

    def test_reconstruction_fixed_point(self):
        f = self.lognormal_forecast()
        rebuilt = reconstructed_from(f)
        again = reconstructed_from(rebuilt)
        K = sum(m.quantile(0.7) for m in f.marginals)
        x1 = solve_allocation(rebuilt, K)
        x2 = solve_allocation(again, K)
        assert x1.amounts == pytest.approx(x2.amounts, abs=1e-6)

    def test_report_is_json_serializable(self):
        import json

        f = self.lognormal_forecast()
        report = posthoc_impropriety_demo(f, K=5.0, n=200, seed=0)
        json.dumps(report)
