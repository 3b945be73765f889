"""Monthly series container and the transforms the rest of the package composes.

Everything here is a pure function of immutable inputs: series values are
stored as read-only numpy arrays, so results are deterministic and safe to
compute concurrently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    DegenerateRange,
    LengthMismatch,
    NonPositiveValue,
    OutOfRange,
    TooShort,
    UnknownKind,
    UnknownStage,
)

_YM_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True, order=True)
class YearMonth:
    """Calendar month, the native time index of every series."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")

    @classmethod
    def parse(cls, text: str) -> "YearMonth":
        m = _YM_RE.match(text.strip())
        if not m:
            raise ValueError(f"not a YYYY-MM period: {text!r}")
        year, month = int(m.group(1)), int(m.group(2))
        if not 1 <= month <= 12:
            raise ValueError(f"not a YYYY-MM period: {text!r}")
        return cls(year, month)

    @property
    def index(self) -> int:
        return self.year * 12 + (self.month - 1)

    @classmethod
    def from_index(cls, idx: int) -> "YearMonth":
        return cls(idx // 12, idx % 12 + 1)

    def plus(self, months: int) -> "YearMonth":
        return YearMonth.from_index(self.index + months)

    def months_until(self, other: "YearMonth") -> int:
        return other.index - self.index

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


class Stage(Enum):
    MANUFACTURER = "M"
    WHOLESALER = "W"
    RETAILER = "R"

    @classmethod
    def parse(cls, text: str) -> "Stage":
        t = text.strip()
        by_code = {s.value: s for s in cls}
        by_name = {s.name.lower(): s for s in cls}
        if t.upper() in by_code:
            return by_code[t.upper()]
        if t.lower() in by_name:
            return by_name[t.lower()]
        raise UnknownStage(f"unknown stage: {text!r}")


class Kind(Enum):
    DEMAND = "demand"
    INVENTORY = "inventory"
    PRODUCTION = "production"

    @classmethod
    def parse(cls, text: str) -> "Kind":
        t = text.strip().lower()
        for k in cls:
            if t == k.value:
                return k
        raise UnknownKind(f"unknown kind: {text!r}")


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MonthlySeries:
    """Contiguous monthly observations for one industry series.

    Values are deflated millions of USD per month. Demand and inventory must
    be non-negative; inferred production may go negative.
    """

    industry_id: str
    stage: Stage
    kind: Kind
    start: YearMonth
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.ndim != 1 or len(self.values) < 2:
            raise TooShort(
                f"{self.industry_id}/{self.kind.value}: need at least 2 monthly values"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.industry_id}/{self.kind.value}: non-finite value")
        if self.kind in (Kind.DEMAND, Kind.INVENTORY) and np.any(self.values < 0):
            raise ValueError(
                f"{self.industry_id}/{self.kind.value}: negative {self.kind.value} value"
            )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> YearMonth:
        return self.start.plus(len(self.values) - 1)

    def index_of(self, ym: YearMonth) -> int:
        pos = self.start.months_until(ym)
        if not 0 <= pos < len(self.values):
            raise OutOfRange(f"{ym} outside coverage {self.start}..{self.end}")
        return pos

    def window(self, first: YearMonth, last: YearMonth) -> np.ndarray:
        """Values on the inclusive period window [first, last]."""
        if last < first:
            raise OutOfRange(f"empty window {first}..{last}")
        lo, hi = self.index_of(first), self.index_of(last)
        return self.values[lo : hi + 1]

    def with_values(self, values, *, kind: Kind | None = None,
                    start: YearMonth | None = None) -> "MonthlySeries":
        return MonthlySeries(
            industry_id=self.industry_id,
            stage=self.stage,
            kind=kind or self.kind,
            start=start or self.start,
            values=values,
        )


SeriesLike = Union[MonthlySeries, Sequence[float], np.ndarray]


def _values(x: SeriesLike) -> np.ndarray:
    if isinstance(x, MonthlySeries):
        return x.values
    return np.asarray(x, dtype=float)


def log_values(x: SeriesLike) -> np.ndarray:
    """Natural log of a strictly positive sequence; inverse is np.exp."""
    v = _values(x)
    if np.any(v <= 0):
        raise NonPositiveValue("log requires strictly positive values")
    return np.log(v)


def log_diff(x: SeriesLike) -> np.ndarray:
    """First differences of the logged sequence, ln(x[k+1]) - ln(x[k])."""
    v = _values(x)
    if len(v) < 2:
        raise TooShort("log_diff needs at least 2 values")
    if np.any(v <= 0):
        raise NonPositiveValue("log_diff requires strictly positive values")
    return np.diff(np.log(v))


def sample_variance(x: SeriesLike) -> float:
    """Unbiased sample variance (divisor n-1)."""
    v = _values(x)
    if len(v) < 2:
        raise TooShort("sample variance needs at least 2 values")
    return float(np.var(v, ddof=1))


@dataclass(frozen=True)
class MinMaxRecipe:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DegenerateRange(f"need hi > lo, got [{self.lo}, {self.hi}]")


def minmax_fit(x: SeriesLike) -> MinMaxRecipe:
    v = _values(x)
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi == lo:
        raise DegenerateRange("constant sequence cannot be min-max scaled")
    return MinMaxRecipe(lo, hi)


def minmax_apply(x: SeriesLike, r: MinMaxRecipe) -> np.ndarray:
    return (_values(x) - r.lo) / (r.hi - r.lo)


def minmax_invert(y: SeriesLike, r: MinMaxRecipe) -> np.ndarray:
    return _values(y) * (r.hi - r.lo) + r.lo


@dataclass(frozen=True)
class DecompositionResult:
    """Additive decomposition: value = trend + seasonal + residual.

    ``trend`` and ``residual`` are NaN where the centered moving average is
    undefined (first/last half-period). ``seasonal`` holds one index per
    cycle position; position of global index k is ``k % period``, which for
    monthly data keeps a fixed calendar-month alignment.
    """

    period: int
    start: YearMonth
    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "trend", _readonly(self.trend))
        object.__setattr__(self, "seasonal", _readonly(self.seasonal))
        object.__setattr__(self, "residual", _readonly(self.residual))

    @property
    def n(self) -> int:
        return len(self.trend)

    def seasonal_at(self, pos) -> np.ndarray:
        pos = np.asarray(pos, dtype=int)
        return self.seasonal[pos % self.period]

    def _tail_line(self) -> tuple[float, float]:
        """Slope/intercept of the line through the last 12 defined trend points."""
        defined = np.flatnonzero(~np.isnan(self.trend))
        idx = defined[-min(12, len(defined)):]
        if len(idx) < 2:
            t0 = int(idx[0])
            return 0.0, float(self.trend[t0])
        slope, intercept = np.polyfit(idx.astype(float), self.trend[idx], 1)
        return float(slope), float(intercept)

    def trend_at(self, pos) -> np.ndarray:
        """Trend value at global positions, extrapolating past the defined tail.

        Positions before the first defined trend point stay NaN; positions
        after the last defined point continue the line fitted to the last
        12 defined points.
        """
        pos = np.asarray(pos, dtype=int)
        defined = np.flatnonzero(~np.isnan(self.trend))
        last = int(defined[-1])
        out = np.full(pos.shape, np.nan, dtype=float)
        inside = (pos >= 0) & (pos <= last)
        out[inside] = self.trend[pos[inside]]
        beyond = pos > last
        if np.any(beyond):
            slope, intercept = self._tail_line()
            out[beyond] = slope * pos[beyond] + intercept
        return out


def decompose_additive(s: SeriesLike, period: int = 12,
                       start: YearMonth | None = None) -> DecompositionResult:
    """Classical additive decomposition around a centered moving average.

    Trend is the centered 2x``period`` moving average (plain centered average
    for odd periods), undefined on the first/last half-period. Seasonal
    indices are per-cycle-position means of the detrended values, re-centered
    to sum to zero.
    """
    v = _values(s)
    if isinstance(s, MonthlySeries):
        start = s.start
    start = start or YearMonth(2000, 1)
    n = len(v)
    if n < 2 * period:
        raise TooShort(f"decomposition needs >= {2 * period} values, got {n}")

    trend = np.full(n, np.nan)
    if period % 2 == 0:
        half = period // 2
        w = np.full(period + 1, 1.0 / period)
        w[0] = w[-1] = 0.5 / period
        trend[half : n - half] = np.convolve(v, w, mode="valid")
    else:
        half = period // 2
        w = np.full(period, 1.0 / period)
        trend[half : n - half] = np.convolve(v, w, mode="valid")

    detrended = v - trend
    cycle = np.arange(n) % period
    seasonal = np.array([
        np.nanmean(detrended[cycle == j]) for j in range(period)
    ])
    seasonal -= seasonal.mean()
    residual = v - trend - seasonal[cycle]
    return DecompositionResult(period=period, start=start, trend=trend,
                               seasonal=seasonal, residual=residual)


def recompose(d: DecompositionResult, values: SeriesLike, start: int = 0) -> np.ndarray:
    """Add trend and seasonal components back onto residuals or forecasts.

    ``start`` is the global position of ``values[0]``: 0 realigns with the
    original sample (and then the length must match), ``d.n`` appends a
    forecast horizon, for which the trend is extrapolated linearly from the
    last 12 defined trend points.
    """
    v = _values(values)
    if start == 0 and len(v) != d.n:
        raise LengthMismatch(
            f"in-sample recompose needs length {d.n}, got {len(v)}"
        )
    pos = np.arange(start, start + len(v))
    return d.trend_at(pos) + d.seasonal_at(pos) + v


def detrend_deseasonalize(d: DecompositionResult, values: SeriesLike,
                          start: int = 0) -> np.ndarray:
    """Inverse of :func:`recompose`: strip trend and seasonal at positions."""
    v = _values(values)
    pos = np.arange(start, start + len(v))
    return v - d.trend_at(pos) - d.seasonal_at(pos)
