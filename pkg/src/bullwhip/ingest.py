"""Panel and deflator CSV ingestion, price/margin adjustment, train/test split.

Input schemas (UTF-8, comma separated, header required):

    panel:    industry_id,stage,kind,period,value
    deflator: stage,period,value

Periods are ``YYYY-MM``. Stages are M/W/R (or full names), kinds are
demand/inventory/production. Gaps of at most two consecutive months are
linearly interpolated with a warning; longer gaps are errors.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DuplicatePeriod,
    GapTooLong,
    MalformedRow,
    ManifestError,
    Misaligned,
    MissingRate,
    NonPositiveDeflator,
    OutOfRange,
    UnknownKind,
    UnknownStage,
)
from .series import Kind, MonthlySeries, Stage, YearMonth

PANEL_HEADER = ["industry_id", "stage", "kind", "period", "value"]
DEFLATOR_HEADER = ["stage", "period", "value"]
MAX_GAP = 2


@dataclass(frozen=True)
class IndustryRecord:
    industry_id: str
    stage: Stage
    demand: MonthlySeries
    inventory: MonthlySeries


@dataclass(frozen=True)
class IndustryPanel:
    """Aligned demand/inventory series for a set of industries."""

    industries: tuple[IndustryRecord, ...]
    start: YearMonth
    end: YearMonth

    def __len__(self) -> int:
        return len(self.industries)

    def __iter__(self):
        return iter(self.industries)

    def get(self, industry_id: str) -> IndustryRecord:
        for rec in self.industries:
            if rec.industry_id == industry_id:
                return rec
        raise KeyError(industry_id)

    @property
    def n_months(self) -> int:
        return self.start.months_until(self.end) + 1


@dataclass(frozen=True)
class DeflatorSeries:
    """Price index (base 100) for one stage; not a demand/inventory series."""

    stage: Stage
    start: YearMonth
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if np.any(arr <= 0):
            raise NonPositiveDeflator(f"deflator for {self.stage.value} has value <= 0")

    @property
    def end(self) -> YearMonth:
        return self.start.plus(len(self.values) - 1)


@dataclass(frozen=True)
class MarginConfig:
    """Gross-margin rate per stage, used to restate sales at cost.

    The shipped defaults (M 0.0, W 0.15, R 0.30) are placeholders so toy
    runs work out of the box; supply realistic rates for serious analyses.
    """

    rates: Mapping[Stage, float]

    def __post_init__(self):
        for stage, rate in self.rates.items():
            if not 0 <= rate < 1:
                raise ValueError(f"margin rate for {stage.value} outside [0, 1): {rate}")

    @classmethod
    def default(cls) -> "MarginConfig":
        return cls({Stage.MANUFACTURER: 0.0, Stage.WHOLESALER: 0.15, Stage.RETAILER: 0.30})

    def rate(self, stage: Stage) -> float:
        if stage not in self.rates:
            raise MissingRate(f"no margin rate configured for stage {stage.value}")
        return self.rates[stage]


def _fill_gaps(label: str, rows: list[tuple[YearMonth, float]]) -> tuple[YearMonth, np.ndarray]:
    """Sort rows, interpolate gaps of <= MAX_GAP months, error on longer ones."""
    rows = sorted(rows, key=lambda r: r[0])
    seen = {}
    for ym, v in rows:
        if ym in seen:
            raise DuplicatePeriod(f"{label}: period {ym} appears twice")
        seen[ym] = v
    start, end = rows[0][0], rows[-1][0]
    n = start.months_until(end) + 1
    values = np.full(n, np.nan)
    for ym, v in seen.items():
        values[start.months_until(ym)] = v
    missing = np.isnan(values)
    if missing.any():
        gaps = []
        i = 0
        while i < n:
            if missing[i]:
                j = i
                while j < n and missing[j]:
                    j += 1
                gaps.append((i, j))
                i = j
            else:
                i += 1
        for lo, hi in gaps:
            if hi - lo > MAX_GAP:
                raise GapTooLong(
                    f"{label}: {hi - lo} consecutive months missing starting {start.plus(lo)}"
                )
        warnings.warn(
            f"{label}: interpolated {int(missing.sum())} missing month(s)",
            stacklevel=2,
        )
        idx = np.arange(n)
        values[missing] = np.interp(idx[missing], idx[~missing], values[~missing])
    return start, values


def parse_panel_csv(text: str) -> list[MonthlySeries]:
    """Parse the panel schema into one series per (industry, kind).

    Rows may arrive in any order; each series is assembled sorted by period.
    Every malformed line is reported with its 1-based line number.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "empty file, expected header") from None
    if [h.strip() for h in header] != PANEL_HEADER:
        raise MalformedRow(1, f"expected header {','.join(PANEL_HEADER)}")

    groups: dict[tuple[str, Kind], list[tuple[YearMonth, float]]] = {}
    stages: dict[tuple[str, Kind], Stage] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 5:
            raise MalformedRow(line_no, f"expected 5 fields, got {len(row)}")
        industry_id = row[0].strip()
        if not industry_id:
            raise MalformedRow(line_no, "empty industry_id")
        try:
            stage = Stage.parse(row[1])
            kind = Kind.parse(row[2])
        except (UnknownStage, UnknownKind) as exc:
            raise type(exc)(f"line {line_no}: {exc}") from None
        try:
            period = YearMonth.parse(row[3])
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        try:
            value = float(row[4])
        except ValueError:
            raise MalformedRow(line_no, f"not a number: {row[4]!r}") from None
        key = (industry_id, kind)
        if key in stages and stages[key] != stage:
            raise MalformedRow(
                line_no, f"{industry_id}: conflicting stage {row[1]!r}"
            )
        stages[key] = stage
        groups.setdefault(key, []).append((period, value))

    out = []
    for (industry_id, kind), rows in groups.items():
        start, values = _fill_gaps(f"{industry_id}/{kind.value}", rows)
        out.append(
            MonthlySeries(industry_id=industry_id, stage=stages[(industry_id, kind)],
                          kind=kind, start=start, values=values)
        )
    return out


def parse_deflator_csv(text: str) -> dict[Stage, DeflatorSeries]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "empty file, expected header") from None
    if [h.strip() for h in header] != DEFLATOR_HEADER:
        raise MalformedRow(1, f"expected header {','.join(DEFLATOR_HEADER)}")
    groups: dict[Stage, list[tuple[YearMonth, float]]] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise MalformedRow(line_no, f"expected 3 fields, got {len(row)}")
        try:
            stage = Stage.parse(row[0])
        except UnknownStage as exc:
            raise UnknownStage(f"line {line_no}: {exc}") from None
        try:
            period = YearMonth.parse(row[1])
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        try:
            value = float(row[2])
        except ValueError:
            raise MalformedRow(line_no, f"not a number: {row[2]!r}") from None
        groups.setdefault(stage, []).append((period, value))
    out = {}
    for stage, rows in groups.items():
        start, values = _fill_gaps(f"deflator/{stage.value}", rows)
        out[stage] = DeflatorSeries(stage=stage, start=start, values=values)
    return out


def deflate(nominal: MonthlySeries, deflator: DeflatorSeries) -> MonthlySeries:
    """Divide nominal values by deflator/100 to obtain real values."""
    if deflator.start > nominal.start or deflator.end < nominal.end:
        raise Misaligned(
            f"deflator covers {deflator.start}..{deflator.end}, "
            f"series needs {nominal.start}..{nominal.end}"
        )
    offset = deflator.start.months_until(nominal.start)
    d = deflator.values[offset : offset + len(nominal)]
    return nominal.with_values(nominal.values / (d / 100.0))


def margin_adjust(sales: MonthlySeries, cfg: MarginConfig) -> MonthlySeries:
    """Restate a demand (sales) series at cost using the stage margin."""
    if sales.kind != Kind.DEMAND:
        raise ValueError("margin adjustment applies to demand series only")
    rate = cfg.rate(sales.stage)
    return sales.with_values(sales.values * (1.0 - rate))


def assemble_panel(series: Iterable[MonthlySeries]) -> IndustryPanel:
    """Pair demand/inventory per industry and check global alignment."""
    by_industry: dict[str, dict[Kind, MonthlySeries]] = {}
    for s in series:
        by_industry.setdefault(s.industry_id, {})[s.kind] = s
    records = []
    start = end = None
    for industry_id in sorted(by_industry):
        kinds = by_industry[industry_id]
        if Kind.DEMAND not in kinds or Kind.INVENTORY not in kinds:
            raise Misaligned(f"{industry_id}: needs both demand and inventory series")
        dem, inv = kinds[Kind.DEMAND], kinds[Kind.INVENTORY]
        if dem.start != inv.start or len(dem) != len(inv):
            raise Misaligned(f"{industry_id}: demand and inventory cover different periods")
        if dem.stage != inv.stage:
            raise Misaligned(f"{industry_id}: demand and inventory disagree on stage")
        if start is None:
            start, end = dem.start, dem.end
        elif dem.start != start or dem.end != end:
            raise Misaligned(
                f"{industry_id}: covers {dem.start}..{dem.end}, panel covers {start}..{end}"
            )
        records.append(IndustryRecord(industry_id, dem.stage, dem, inv))
    if not records:
        raise Misaligned("no industries found")
    return IndustryPanel(industries=tuple(records), start=start, end=end)


def adjust_panel(panel: IndustryPanel, deflators: Mapping[Stage, DeflatorSeries] | None,
                 margins: MarginConfig) -> IndustryPanel:
    """Deflate both series per stage, then margin-adjust demand only."""
    out = []
    for rec in panel:
        dem, inv = rec.demand, rec.inventory
        if deflators is not None:
            if rec.stage not in deflators:
                raise Misaligned(f"{rec.industry_id}: no deflator for stage {rec.stage.value}")
            dem = deflate(dem, deflators[rec.stage])
            inv = deflate(inv, deflators[rec.stage])
        dem = margin_adjust(dem, margins)
        out.append(IndustryRecord(rec.industry_id, rec.stage, dem, inv))
    return IndustryPanel(industries=tuple(out), start=panel.start, end=panel.end)


def _slice_series(s: MonthlySeries, first: YearMonth, last: YearMonth) -> MonthlySeries:
    lo = s.index_of(first)
    hi = s.index_of(last)
    return s.with_values(s.values[lo : hi + 1], start=first)


def split_panel(panel: IndustryPanel, train_end: YearMonth) -> tuple[IndustryPanel, IndustryPanel]:
    """Split into train (start..train_end inclusive) and test (the rest)."""
    if not (panel.start <= train_end < panel.end):
        raise OutOfRange(
            f"train_end {train_end} must lie inside coverage {panel.start}..{panel.end}"
        )
    test_start = train_end.plus(1)
    train_recs, test_recs = [], []
    for rec in panel:
        train_recs.append(IndustryRecord(
            rec.industry_id, rec.stage,
            _slice_series(rec.demand, panel.start, train_end),
            _slice_series(rec.inventory, panel.start, train_end),
        ))
        test_recs.append(IndustryRecord(
            rec.industry_id, rec.stage,
            _slice_series(rec.demand, test_start, panel.end),
            _slice_series(rec.inventory, test_start, panel.end),
        ))
    train = IndustryPanel(tuple(train_recs), panel.start, train_end)
    test = IndustryPanel(tuple(test_recs), test_start, panel.end)
    return train, test


def panel_to_csv(series: Iterable[MonthlySeries]) -> str:
    """Serialize series back to the panel schema (sorted, LF line endings)."""
    lines = [",".join(PANEL_HEADER)]
    ordered = sorted(series, key=lambda s: (s.industry_id, s.kind.value))
    for s in ordered:
        for k, v in enumerate(s.values):
            lines.append(
                f"{s.industry_id},{s.stage.value},{s.kind.value},{s.start.plus(k)},{float(v)!r}"
            )
    return "\n".join(lines) + "\n"


def parse_manifest(text: str) -> dict[str, str]:
    """Parse the ``key = value`` manifest format ('#' starts a comment)."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ManifestError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key:
            raise ManifestError(f"line {line_no}: empty key")
        if key in out:
            raise ManifestError(f"line {line_no}: duplicate key {key!r}")
        out[key] = value
    return out
