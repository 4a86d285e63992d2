"""File ingestion and report persistence.

CSV schemas:

- forecasts: ``model,location,target_date,quantile_level,value``
- truth: ``location,date,value``
- population: ``location,population``

Score reports are persisted either as JSON (full detail including the
per-location breakdown) or as CSV (one summary row per report). All
numeric output uses full round-trip decimal precision and deterministic
ordering.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import date

from .alloc import Allocation
from .dist import QuantileSet
from .errors import (
    CrossedQuantiles,
    DuplicateRecord,
    IoError,
    MissingLocation,
    ParseError,
)
from .score import LocationRecord, RankEntry, ScoreReport

__all__ = [
    "FORECAST_HEADER",
    "TRUTH_HEADER",
    "POPULATION_HEADER",
    "load_forecasts",
    "load_truth",
    "load_population",
    "per_capita_allocation",
    "write_reports",
    "load_reports",
    "write_rank_table",
    "load_rank_table",
]

FORECAST_HEADER = ["model", "location", "target_date", "quantile_level", "value"]
TRUTH_HEADER = ["location", "date", "value"]
POPULATION_HEADER = ["location", "population"]

REPORT_CSV_HEADER = [
    "model",
    "target_date",
    "K",
    "L",
    "raw_score",
    "oracle_loss",
    "allocation_score",
    "shared_level",
]


def _open_rows(path, expected_header):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        fh.close()
        raise ParseError(f"{path}: line 1: empty file, expected header "
                         f"{','.join(expected_header)}")
    if [h.strip() for h in header] != expected_header:
        fh.close()
        raise ParseError(
            f"{path}: line 1: bad header {','.join(header)!r}, "
            f"expected {','.join(expected_header)}"
        )
    return fh, reader


def _parse_float(raw, path, lineno, what):
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"{path}: line {lineno}: invalid {what}: {raw!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"{path}: line {lineno}: non-finite {what}: {raw!r}")
    return value


def _parse_date(raw, path, lineno):
    try:
        return date.fromisoformat(raw).isoformat()
    except ValueError:
        raise ParseError(f"{path}: line {lineno}: invalid ISO date: {raw!r}") from None


def load_forecasts(path, require_locations=None):
    """Load forecast records grouped as (model, target_date) -> location -> QuantileSet.

    Raises CrossedQuantiles if any location's quantile values decrease in
    level, DuplicateRecord on repeated (model, location, date, level)
    rows, and MissingLocation when ``require_locations`` is given and a
    group lacks one of them.
    """
    fh, reader = _open_rows(path, FORECAST_HEADER)
    records = {}
    with fh:
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ParseError(f"{path}: line {lineno}: expected 5 fields, got {len(row)}")
            model, location, target_date, level_raw, value_raw = [f.strip() for f in row]
            target_date = _parse_date(target_date, path, lineno)
            level = _parse_float(level_raw, path, lineno, "quantile level")
            if not 0.0 < level < 1.0:
                raise ParseError(
                    f"{path}: line {lineno}: quantile level must lie in (0, 1): {level}"
                )
            value = _parse_float(value_raw, path, lineno, "value")
            key = (model, location, target_date, level)
            if key in records:
                raise DuplicateRecord(
                    f"duplicate forecast row for model={model} location={location} "
                    f"date={target_date} level={level}"
                )
            records[key] = value

    grouped = {}
    for (model, location, target_date, level), value in records.items():
        grouped.setdefault((model, target_date), {}).setdefault(location, []).append(
            (level, value)
        )

    out = {}
    for (model, target_date), by_loc in sorted(grouped.items()):
        loc_sets = {}
        for location, pairs in sorted(by_loc.items()):
            pairs.sort()
            levels = [t for t, _ in pairs]
            values = [v for _, v in pairs]
            if any(b < a for a, b in zip(values, values[1:])):
                raise CrossedQuantiles(
                    f"crossed quantiles for model={model} location={location} "
                    f"date={target_date}"
                )
            loc_sets[location] = QuantileSet(levels=tuple(levels), values=tuple(values))
        if require_locations is not None:
            missing = [loc for loc in require_locations if loc not in loc_sets]
            if missing:
                raise MissingLocation(
                    f"model={model} date={target_date} lacks locations: {missing}"
                )
        out[(model, target_date)] = loc_sets
    return out


def load_truth(path):
    """Load observed values as (location, date) -> value."""
    fh, reader = _open_rows(path, TRUTH_HEADER)
    out = {}
    with fh:
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
            location, day, value_raw = [f.strip() for f in row]
            day = _parse_date(day, path, lineno)
            value = _parse_float(value_raw, path, lineno, "value")
            if value < 0:
                raise ParseError(f"{path}: line {lineno}: negative truth value: {value}")
            key = (location, day)
            if key in out:
                raise DuplicateRecord(f"duplicate truth row for location={location} date={day}")
            out[key] = value
    return out


def load_population(path):
    """Load populations as location -> population."""
    fh, reader = _open_rows(path, POPULATION_HEADER)
    out = {}
    with fh:
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 2 fields, got {len(row)}")
            location, pop_raw = [f.strip() for f in row]
            pop = _parse_float(pop_raw, path, lineno, "population")
            if pop <= 0:
                raise ParseError(f"{path}: line {lineno}: population must be positive: {pop}")
            if location in out:
                raise DuplicateRecord(f"duplicate population row for location={location}")
            out[location] = pop
    return out


def per_capita_allocation(populations, locations, K) -> Allocation:
    """Allocate K proportionally to location population."""
    missing = [loc for loc in locations if loc not in populations]
    if missing:
        raise MissingLocation(f"no population for locations: {missing}")
    total = sum(populations[loc] for loc in locations)
    amounts = [K * populations[loc] / total for loc in locations]
    return Allocation(amounts=tuple(amounts), constraint=K, shared_level=None)


# -- report persistence -------------------------------------------------------


def _report_to_dict(report: ScoreReport) -> dict:
    return {
        "model": report.model,
        "target_date": report.target_date,
        "K": report.K,
        "L": report.L,
        "raw_score": report.raw_score,
        "oracle_loss": report.oracle_loss,
        "allocation_score": report.allocation_score,
        "shared_level": report.shared_level,
        "per_location": [
            {
                "location": rec.location,
                "allocated": rec.allocated,
                "observed": rec.observed,
                "unmet": rec.unmet,
            }
            for rec in report.per_location
        ],
    }


def _report_from_dict(obj: dict) -> ScoreReport:
    return ScoreReport(
        raw_score=float(obj["raw_score"]),
        oracle_loss=float(obj["oracle_loss"]),
        allocation_score=float(obj["allocation_score"]),
        shared_level=None if obj["shared_level"] is None else float(obj["shared_level"]),
        per_location=tuple(
            LocationRecord(
                location=rec["location"],
                allocated=float(rec["allocated"]),
                observed=float(rec["observed"]),
                unmet=float(rec["unmet"]),
            )
            for rec in obj.get("per_location", [])
        ),
        K=float(obj["K"]),
        L=float(obj["L"]),
        model=obj.get("model"),
        target_date=obj.get("target_date"),
    )


def _fmt(value):
    if value is None:
        return ""
    return repr(float(value))


def write_reports(reports, path, format="csv"):
    """Persist score reports; JSON keeps the per-location breakdown, CSV
    writes one summary row per report."""
    reports = list(reports)
    try:
        if format == "json":
            with open(path, "w", encoding="utf-8") as fh:
                json.dump([_report_to_dict(r) for r in reports], fh, indent=2)
                fh.write("\n")
        elif format == "csv":
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(REPORT_CSV_HEADER)
                for r in reports:
                    writer.writerow(
                        [
                            r.model or "",
                            r.target_date or "",
                            _fmt(r.K),
                            _fmt(r.L),
                            _fmt(r.raw_score),
                            _fmt(r.oracle_loss),
                            _fmt(r.allocation_score),
                            _fmt(r.shared_level),
                        ]
                    )
        else:
            raise ValueError(f"unsupported format: {format!r}")
    except OSError as exc:
        raise IoError(str(exc)) from exc


def load_reports(path, format="csv"):
    """Inverse of write_reports. CSV restores summary fields only."""
    try:
        if format == "json":
            with open(path, encoding="utf-8") as fh:
                return [_report_from_dict(obj) for obj in json.load(fh)]
        if format != "csv":
            raise ValueError(f"unsupported format: {format!r}")
        fh, reader = _open_rows(path, REPORT_CSV_HEADER)
        out = []
        with fh:
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                model, target_date, k, l, raw, oracle, score, level = row
                out.append(
                    ScoreReport(
                        raw_score=_parse_float(raw, path, lineno, "raw_score"),
                        oracle_loss=_parse_float(oracle, path, lineno, "oracle_loss"),
                        allocation_score=_parse_float(score, path, lineno, "allocation_score"),
                        shared_level=(
                            None if level == "" else _parse_float(level, path, lineno, "shared_level")
                        ),
                        per_location=(),
                        K=_parse_float(k, path, lineno, "K"),
                        L=_parse_float(l, path, lineno, "L"),
                        model=model or None,
                        target_date=target_date or None,
                    )
                )
        return out
    except OSError as exc:
        raise IoError(str(exc)) from exc


RANK_HEADER = ["model", "score", "standardized_rank"]


def write_rank_table(entries, path):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(RANK_HEADER)
            for e in entries:
                writer.writerow([e.model, _fmt(e.score), _fmt(e.standardized_rank)])
    except OSError as exc:
        raise IoError(str(exc)) from exc


def load_rank_table(path):
    fh, reader = _open_rows(path, RANK_HEADER)
    out = []
    with fh:
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            model, score, rank = row
            out.append(
                RankEntry(
                    model=model,
                    score=_parse_float(score, path, lineno, "score"),
                    standardized_rank=_parse_float(rank, path, lineno, "standardized_rank"),
                )
            )
    return out
