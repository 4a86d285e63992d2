"""Command-line interface.

Subcommands: allocate, score, ias, wis, sweep, lab. All tabular output is
deterministic (sorted keys, full-precision floats) so identical inputs
and flags yield byte-identical output. Exit codes: 0 success, 2 input or
parse error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import hubio, lab, score as scoring
from .alloc import LossParams, MultiForecast, Outcome, SolverConfig
from .dist import Exponential, LogNormal, from_quantiles
from .errors import (
    AllocscoreError,
    CrossedQuantiles,
    DegenerateTail,
    DuplicateRecord,
    InfeasibleAllocation,
    InfeasibleConstraint,
    IoError,
    MissingLocation,
    NoConvergence,
    ParseError,
)

DEFAULT_K = 15_000.0
DEFAULT_WEIGHT = "truncnormal:15000,3000,5000,25000"
PER_CAPITA_MODEL = "per-capita"

_INPUT_ERRORS = (
    ParseError,
    CrossedQuantiles,
    DuplicateRecord,
    MissingLocation,
    IoError,
    InfeasibleAllocation,
    ValueError,
)
_SOLVER_ERRORS = (NoConvergence, InfeasibleConstraint, DegenerateTail)


def _parse_weight(spec: str, step: float):
    kind, _, rest = spec.partition(":")
    try:
        params = [float(p) for p in rest.split(",")] if rest else []
    except ValueError:
        raise ValueError(f"bad weight spec: {spec!r}") from None
    if kind == "uniform" and len(params) in (2, 3):
        gs = params[2] if len(params) == 3 else step
        return scoring.UniformWeights(k_min=params[0], k_max=params[1], grid_step=gs)
    if kind == "truncnormal" and len(params) in (4, 5):
        gs = params[4] if len(params) == 5 else step
        return scoring.TruncNormalWeights(
            center=params[0], sd=params[1], lower=params[2], upper=params[3], grid_step=gs
        )
    if kind == "point" and len(params) == 1:
        return scoring.PointMassWeight(k=params[0])
    raise ValueError(f"bad weight spec: {spec!r}")


def _filter_groups(groups, models, min_weeks):
    if models is not None:
        wanted = set(models.split(","))
        groups = {k: v for k, v in groups.items() if k[0] in wanted}
    if min_weeks:
        weeks = {}
        for model, date in groups:
            weeks.setdefault(model, set()).add(date)
        groups = {
            k: v for k, v in groups.items() if len(weeks[k[0]]) >= min_weeks
        }
    return groups


def _multiforecast(loc_sets):
    locations = tuple(sorted(loc_sets))
    marginals = tuple(from_quantiles(loc_sets[loc]) for loc in locations)
    return MultiForecast(locations=locations, marginals=marginals)


def _outcome_for(locations, date, truth):
    values = []
    for loc in locations:
        if (loc, date) not in truth:
            raise ParseError(f"no truth value for location={loc} date={date}")
        values.append(truth[(loc, date)])
    return Outcome(values=tuple(values))


def _emit(rows, header, out_path=None):
    if out_path:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x):
    return "" if x is None else repr(float(x))


def cmd_allocate(args):
    groups = _filter_groups(
        hubio.load_forecasts(args.forecasts), args.models, args.min_weeks
    )
    rows = []
    for (model, date), loc_sets in sorted(groups.items()):
        forecast = _multiforecast(loc_sets)
        from .alloc import solve_allocation

        x = solve_allocation(forecast, args.k, SolverConfig())
        for loc, amount in zip(forecast.locations, x.amounts):
            rows.append([model, date, loc, _fmt(amount), _fmt(x.shared_level)])
    _emit(rows, ["model", "target_date", "location", "allocation", "shared_level"], args.out)
    return 0


def cmd_score(args):
    groups = _filter_groups(
        hubio.load_forecasts(args.forecasts), args.models, args.min_weeks
    )
    truth = hubio.load_truth(args.truth)
    populations = hubio.load_population(args.population) if args.population else None
    loss = LossParams(per_unit_loss=args.loss)
    cfg = SolverConfig()

    reports = []
    mwis_by_key = {}
    dates = sorted({date for _, date in groups})
    for (model, date), loc_sets in sorted(groups.items()):
        forecast = _multiforecast(loc_sets)
        y = _outcome_for(forecast.locations, date, truth)
        reports.append(
            scoring.allocation_score(
                forecast, y, args.k, loss, cfg, model=model, target_date=date
            )
        )
        mwis_by_key[(model, date)] = scoring.mean_wis(loc_sets, y, forecast.locations)
    if populations is not None:
        for date in dates:
            locations = tuple(sorted({loc for (loc, d) in truth if d == date}))
            sample = next(
                (ls for (m, d), ls in sorted(groups.items()) if d == date), None
            )
            if sample is not None:
                locations = tuple(sorted(sample))
            x = hubio.per_capita_allocation(populations, locations, args.k)
            y = _outcome_for(locations, date, truth)
            reports.append(
                scoring.score_fixed_allocation(
                    x, y, args.k, loss, locations=locations,
                    model=PER_CAPITA_MODEL, target_date=date,
                )
            )

    if args.out:
        hubio.write_reports(reports, args.out, format=args.format)
    else:
        _emit(
            [
                [
                    r.model,
                    r.target_date,
                    _fmt(r.K),
                    _fmt(r.L),
                    _fmt(r.raw_score),
                    _fmt(r.oracle_loss),
                    _fmt(r.allocation_score),
                    _fmt(r.shared_level),
                ]
                for r in reports
            ],
            hubio.REPORT_CSV_HEADER,
        )

    rank_rows = []
    for date in dates:
        day_reports = sorted(
            (r for r in reports if r.target_date == date), key=lambda r: r.model
        )
        ranks = scoring.standardized_ranks(
            [(r.model, r.allocation_score) for r in day_reports]
        )
        for entry in ranks:
            mwis = mwis_by_key.get((entry.model, date))
            rank_rows.append(
                [entry.model, date, _fmt(entry.score), _fmt(entry.standardized_rank),
                 _fmt(mwis)]
            )
    _emit(
        rank_rows,
        ["model", "target_date", "allocation_score", "standardized_rank", "mwis"],
        args.ranks,
    )
    return 0


def cmd_ias(args):
    groups = _filter_groups(
        hubio.load_forecasts(args.forecasts), args.models, args.min_weeks
    )
    truth = hubio.load_truth(args.truth)
    weights = _parse_weight(args.weight, args.k_step)
    loss = LossParams(per_unit_loss=args.loss)
    rows = []
    for (model, date), loc_sets in sorted(groups.items()):
        forecast = _multiforecast(loc_sets)
        y = _outcome_for(forecast.locations, date, truth)
        ias = scoring.integrated_allocation_score(forecast, y, weights, loss)
        rows.append([model, date, _fmt(ias)])
    _emit(rows, ["model", "target_date", "ias"], args.out)
    return 0


def cmd_wis(args):
    groups = _filter_groups(
        hubio.load_forecasts(args.forecasts), args.models, args.min_weeks
    )
    truth = hubio.load_truth(args.truth)
    rows = []
    for (model, date), loc_sets in sorted(groups.items()):
        locations = tuple(sorted(loc_sets))
        y = _outcome_for(locations, date, truth)
        rows.append([model, date, _fmt(scoring.mean_wis(loc_sets, y, locations))])
    _emit(rows, ["model", "target_date", "mwis"], args.out)
    return 0


def cmd_sweep(args):
    groups = _filter_groups(
        hubio.load_forecasts(args.forecasts), args.models, args.min_weeks
    )
    truth = hubio.load_truth(args.truth)
    loss = LossParams(per_unit_loss=args.loss)
    cfg = SolverConfig()
    ks = []
    k = args.k_min
    while k <= args.k_max + 1e-9 * args.k_step:
        ks.append(k)
        k += args.k_step
    rows = []
    for (model, date), loc_sets in sorted(groups.items()):
        forecast = _multiforecast(loc_sets)
        y = _outcome_for(forecast.locations, date, truth)
        for k in ks:
            report = scoring.allocation_score(forecast, y, k, loss, cfg)
            rows.append([model, date, _fmt(k), _fmt(report.allocation_score)])
    _emit(rows, ["model", "target_date", "K", "allocation_score"], args.out)
    return 0


def _parse_floats(raw):
    return [float(p) for p in raw.split(",")]


def cmd_lab(args):
    if args.mode == "propriety":
        scales = _parse_floats(args.scales)
        other = _parse_floats(args.other_scales)
        locations = tuple(str(i + 1) for i in range(len(scales)))
        f = MultiForecast(locations, tuple(Exponential(s) for s in scales))
        g = MultiForecast(locations, tuple(Exponential(s) for s in other))
        result = lab.mc_propriety(f, g, args.k, n=args.n, seed=args.seed)
        print(json.dumps(result.to_dict(), indent=2))
    else:
        mus = _parse_floats(args.lognormal_mu)
        sigmas = _parse_floats(args.lognormal_sigma)
        locations = tuple(str(i + 1) for i in range(len(mus)))
        f = MultiForecast(
            locations, tuple(LogNormal(m, s) for m, s in zip(mus, sigmas))
        )
        report = lab.posthoc_impropriety_demo(f, args.k, n=args.n, seed=args.seed)
        print(json.dumps(report, indent=2))
    return 0


def _add_common(parser, truth=False):
    parser.add_argument("--forecasts", required=True, help="forecast CSV path")
    if truth:
        parser.add_argument("--truth", required=True, help="truth CSV path")
    parser.add_argument("--models", default=None, help="comma-separated model filter")
    parser.add_argument(
        "--min-weeks", type=int, default=0,
        help="drop models with fewer distinct target dates",
    )
    parser.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="allocscore",
        description="Evaluate probabilistic forecasts via resource-allocation scores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", help="print optimal allocations per model")
    _add_common(p)
    p.add_argument("--k", type=float, default=DEFAULT_K)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("score", help="allocation scores and rank table")
    _add_common(p, truth=True)
    p.add_argument("--k", type=float, default=DEFAULT_K)
    p.add_argument("--loss", type=float, default=1.0)
    p.add_argument("--population", default=None, help="population CSV for the per-capita benchmark")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--ranks", default=None, help="rank table output path (default stdout)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("ias", help="integrated allocation scores")
    _add_common(p, truth=True)
    p.add_argument("--weight", default=DEFAULT_WEIGHT,
                   help="uniform:lo,hi[,step] | truncnormal:center,sd,lo,hi[,step] | point:k")
    p.add_argument("--k-step", type=float, default=200.0)
    p.add_argument("--loss", type=float, default=1.0)
    p.set_defaults(func=cmd_ias)

    p = sub.add_parser("wis", help="mean weighted interval scores")
    _add_common(p, truth=True)
    p.set_defaults(func=cmd_wis)

    p = sub.add_parser("sweep", help="allocation score across a K grid")
    _add_common(p, truth=True)
    p.add_argument("--k-min", type=float, required=True)
    p.add_argument("--k-max", type=float, required=True)
    p.add_argument("--k-step", type=float, default=200.0)
    p.add_argument("--loss", type=float, default=1.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lab", help="propriety / impropriety experiments")
    p.add_argument("--mode", choices=["propriety", "impropriety"], required=True)
    p.add_argument("--k", type=float, default=DEFAULT_K)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scales", default="1,4", help="exponential scales of the true forecast")
    p.add_argument("--other-scales", default="4,1", help="exponential scales of the competitor")
    p.add_argument("--lognormal-mu", default="0,1", help="lognormal mu per location")
    p.add_argument("--lognormal-sigma", default="1,1", help="lognormal sigma per location")
    p.set_defaults(func=cmd_lab)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _SOLVER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _INPUT_ERRORS + (AllocscoreError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
