"""Daily precipitation ingestion and reduction to annual block maxima.

Blocks are calendar years. Missing daily values are a distinct state and
never coerced to zero; years with insufficient coverage are dropped and
reported, never imputed.
"""

from __future__ import annotations

import calendar
import csv
import datetime as dt
import io
import json
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence, TextIO

import numpy as np

from .gev import GevParams, gev_quantile
from .seeding import derive_rng

FIRST_SYNTH_YEAR = 1981
DEFAULT_MIN_COVERAGE = 0.8

_HEADER = ["station", "date", "precip_mm"]


class ParseError(ValueError):
    """A malformed input row; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ValueError):
    """Structurally parseable input that violates a data invariant."""


@dataclass(frozen=True)
class DailyRecord:
    """One station-day observation; ``precip_mm`` is None when missing."""

    station_id: str
    date: dt.date
    precip_mm: float | None

    def __post_init__(self) -> None:
        if self.precip_mm is not None and self.precip_mm < 0:
            raise ValidationError(
                f"negative precipitation {self.precip_mm!r} at {self.station_id} {self.date}"
            )


@dataclass
class AnnualMaximaSeries:
    """Per-station yearly maxima with the coverage each year was built under."""

    station_id: str
    years: np.ndarray
    values: np.ndarray
    coverage: np.ndarray

    def __post_init__(self) -> None:
        self.years = np.asarray(self.years, dtype=int)
        self.values = np.asarray(self.values, dtype=float)
        self.coverage = np.asarray(self.coverage, dtype=float)
        if not (len(self.years) == len(self.values) == len(self.coverage)):
            raise ValueError("years, values and coverage must have equal length")
        if len(self.years) and np.any(np.diff(self.years) <= 0):
            raise ValueError(f"years must be strictly increasing for {self.station_id}")
        if np.any(self.values <= 0):
            raise ValueError(f"annual maxima must be positive for {self.station_id}")
        if np.any((self.coverage < 0) | (self.coverage > 1)):
            raise ValueError(f"coverage must lie in [0, 1] for {self.station_id}")

    def __len__(self) -> int:
        return len(self.years)

    def by_year(self) -> dict[int, float]:
        return dict(zip(self.years.tolist(), self.values.tolist()))


@dataclass(frozen=True)
class SkipEntry:
    """A station-year dropped by the coverage filter."""

    station: str
    year: int
    coverage: float


@dataclass(frozen=True)
class SummaryStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float


def parse_daily_csv(source: BinaryIO) -> list[DailyRecord]:
    """Parse a ``station,date,precip_mm`` CSV into daily records.

    An empty precipitation field means missing. Dates are ISO-8601.
    Raises ParseError for malformed rows and ValidationError for negative
    precipitation or duplicated (station, date) keys.
    """
    text = io.TextIOWrapper(source, encoding="utf-8", newline="")
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "empty input, expected header 'station,date,precip_mm'")
    if [h.strip() for h in header] != _HEADER:
        raise ParseError(1, f"expected header {','.join(_HEADER)!r}, got {','.join(header)!r}")

    records: list[DailyRecord] = []
    seen: set[tuple[str, dt.date]] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(lineno, f"expected 3 fields, got {len(row)}")
        station, date_text, precip_text = (field.strip() for field in row)
        if not station:
            raise ParseError(lineno, "empty station id")
        try:
            date = dt.date.fromisoformat(date_text)
        except ValueError:
            raise ParseError(lineno, f"invalid ISO date {date_text!r}")
        if precip_text == "":
            precip: float | None = None
        else:
            try:
                precip = float(precip_text)
            except ValueError:
                raise ParseError(lineno, f"invalid precipitation value {precip_text!r}")
            if precip < 0:
                raise ValidationError(
                    f"line {lineno}: negative precipitation {precip} for {station}"
                )
        key = (station, date)
        if key in seen:
            raise ValidationError(f"line {lineno}: duplicate record for {station} {date}")
        seen.add(key)
        records.append(DailyRecord(station, date, precip))
    return records


def block_maxima(
    records: Iterable[DailyRecord],
    min_coverage: float = DEFAULT_MIN_COVERAGE,
) -> tuple[list[AnnualMaximaSeries], list[SkipEntry]]:
    """Reduce daily records to per-station annual maxima.

    A station-year is retained when the fraction of non-missing days is at
    least ``min_coverage`` and the year's maximum is positive; dropped
    years are returned in the skip log. Stations are ordered by id and
    years ascending, so the result does not depend on input row order.
    """
    if not 0.0 < min_coverage <= 1.0:
        raise ValueError("min_coverage must lie in (0, 1]")

    per_year: dict[str, dict[int, list[float]]] = {}
    for rec in records:
        if rec.precip_mm is None:
            per_year.setdefault(rec.station_id, {}).setdefault(rec.date.year, [])
            continue
        per_year.setdefault(rec.station_id, {}).setdefault(rec.date.year, []).append(
            rec.precip_mm
        )

    series: list[AnnualMaximaSeries] = []
    skipped: list[SkipEntry] = []
    for station in sorted(per_year):
        years: list[int] = []
        maxima: list[float] = []
        coverages: list[float] = []
        for year in sorted(per_year[station]):
            present = per_year[station][year]
            days = 366 if calendar.isleap(year) else 365
            coverage = len(present) / days
            if coverage < min_coverage or max(present, default=0.0) <= 0.0:
                skipped.append(SkipEntry(station, year, coverage))
                continue
            years.append(year)
            maxima.append(max(present))
            coverages.append(coverage)
        if not years:
            raise ValidationError(f"station {station!r} has no year meeting the coverage threshold")
        series.append(AnnualMaximaSeries(station, np.array(years), np.array(maxima), np.array(coverages)))
    return series, skipped


def synth_dataset(
    spec: Sequence[tuple[str, GevParams]],
    years: int,
    seed: int,
) -> list[AnnualMaximaSeries]:
    """Seeded synthetic annual maxima, one series per (station, params) pair.

    Values are i.i.d. inverse-transform draws from each station's GEV law;
    the per-station stream is derived from the master seed, so output is
    bit-reproducible.
    """
    if years < 1:
        raise ValueError("years must be at least 1")
    ids = [station for station, _ in spec]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate station ids in spec")
    year_axis = np.arange(FIRST_SYNTH_YEAR, FIRST_SYNTH_YEAR + years)
    out = []
    for station, params in spec:
        if not isinstance(params, GevParams):
            params = GevParams(*params)
        rng = derive_rng(seed, "synth", station)
        u = rng.random(years)
        u[u == 0.0] = np.nextafter(0.0, 1.0)
        values = np.asarray(gev_quantile(u, params))
        out.append(AnnualMaximaSeries(station, year_axis.copy(), values, np.ones(years)))
    return out


def summary_stats(series: AnnualMaximaSeries) -> SummaryStats:
    """Five-number summary plus mean; quartiles interpolate order statistics."""
    if len(series) == 0:
        raise ValueError(f"series {series.station_id!r} is empty")
    v = series.values
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return SummaryStats(
        minimum=float(v.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        maximum=float(v.max()),
        mean=float(v.mean()),
    )


def write_series_csv(series: Iterable[AnnualMaximaSeries], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["station", "year", "max_mm"])
    for s in series:
        for year, value in zip(s.years.tolist(), s.values.tolist()):
            writer.writerow([s.station_id, year, format(value, ".10g")])


def read_series_csv(stream: TextIO) -> list[AnnualMaximaSeries]:
    """Load series written by :func:`write_series_csv`; coverage is set to 1."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["station", "year", "max_mm"]:
        raise ParseError(1, "expected header 'station,year,max_mm'")
    grouped: dict[str, list[tuple[int, float]]] = {}
    order: list[str] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(lineno, f"expected 3 fields, got {len(row)}")
        station, year_text, value_text = (f.strip() for f in row)
        try:
            year, value = int(year_text), float(value_text)
        except ValueError:
            raise ParseError(lineno, f"invalid year/value {year_text!r},{value_text!r}")
        if station not in grouped:
            grouped[station] = []
            order.append(station)
        grouped[station].append((year, value))
    out = []
    for station in order:
        rows = sorted(grouped[station])
        years = np.array([y for y, _ in rows])
        values = np.array([v for _, v in rows])
        out.append(AnnualMaximaSeries(station, years, values, np.ones(len(rows))))
    return out


def write_skip_log(skips: Iterable[SkipEntry], stream: TextIO) -> None:
    for entry in skips:
        stream.write(
            json.dumps(
                {"station": entry.station, "year": entry.year, "coverage": entry.coverage},
                sort_keys=True,
            )
            + "\n"
        )
