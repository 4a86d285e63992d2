import csv
import math

import pytest

from allocscore import (
    DEFAULT_QUANTILE_LEVELS,
    Exponential,
    MultiForecast,
    Outcome,
    QuantileSet,
)

# Levels chosen so that the shared levels solving the exponential fixture budgets
# (1 - e^-0.5, 1 - e^-1, 1 - e^-2) sit exactly on interpolation knots,
# making file-based allocations match the closed-form ones.
FIXTURE_LEVELS = (
    0.025,
    0.1,
    0.25,
    1.0 - math.exp(-0.5),
    0.5,
    1.0 - math.exp(-1.0),
    0.75,
    1.0 - math.exp(-2.0),
    0.95,
    0.99,
)


def exp_quantiles(scale, levels=FIXTURE_LEVELS):
    return QuantileSet(
        levels=tuple(levels),
        values=tuple(-scale * math.log(1.0 - t) for t in levels),
    )


@pytest.fixture
def example1_forecast():
    return MultiForecast(locations=("1", "2"), marginals=(Exponential(1.0), Exponential(4.0)))


@pytest.fixture
def example1_outcome():
    return Outcome(values=(1.0, 10.0))


@pytest.fixture
def example2_forecast():
    return MultiForecast(locations=("1", "2"), marginals=(Exponential(2.0), Exponential(8.0)))


def write_forecast_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "location", "target_date", "quantile_level", "value"])
        writer.writerows(rows)


def write_truth_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["location", "date", "value"])
        writer.writerows(rows)


def write_population_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["location", "population"])
        writer.writerows(rows)


def forecast_rows(model, target_date, scales, levels=FIXTURE_LEVELS):
    rows = []
    for i, scale in enumerate(scales, start=1):
        q = exp_quantiles(scale, levels)
        for t, v in zip(q.levels, q.values):
            rows.append([model, str(i), target_date, repr(t), repr(v)])
    return rows


@pytest.fixture
def example_files(tmp_path):
    """Exponential fixtures on disk: forecasts, truth, population."""
    fpath = tmp_path / "forecasts.csv"
    tpath = tmp_path / "truth.csv"
    ppath = tmp_path / "population.csv"
    rows = forecast_rows("expA", "2022-01-03", [1.0, 4.0])
    rows += forecast_rows("expB", "2022-01-03", [2.0, 8.0])
    write_forecast_csv(fpath, rows)
    write_truth_csv(tpath, [["1", "2022-01-03", "1"], ["2", "2022-01-03", "10"]])
    write_population_csv(ppath, [["1", "1000000"], ["2", "3000000"]])
    return {"forecasts": fpath, "truth": tpath, "population": ppath}


def default_levels_quantiles(marginal):
    levels = tuple(DEFAULT_QUANTILE_LEVELS)
    return QuantileSet(
        levels=levels, values=tuple(marginal.quantile(t) for t in levels)
    )
