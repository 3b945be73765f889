import math

import numpy as np
import pytest

from bullwhip.errors import (
    DegenerateRange,
    LengthMismatch,
    NonPositiveValue,
    TooShort,
)
from bullwhip.series import (
    Kind,
    MinMaxRecipe,
    MonthlySeries,
    Stage,
    YearMonth,
    decompose_additive,
    detrend_deseasonalize,
    log_diff,
    log_values,
    minmax_apply,
    minmax_fit,
    minmax_invert,
    recompose,
    sample_variance,
)


def series(values, start=YearMonth(2000, 1), kind=Kind.DEMAND):
    return MonthlySeries("TEST", Stage.MANUFACTURER, kind, start, values)


class TestYearMonth:
    def test_parse_and_str(self):
        ym = YearMonth.parse("1992-01")
        assert (ym.year, ym.month) == (1992, 1)
        assert str(ym) == "1992-01"

    def test_arithmetic(self):
        assert YearMonth(2019, 12).plus(1) == YearMonth(2020, 1)
        assert YearMonth(2015, 12).months_until(YearMonth(2016, 3)) == 3
        assert YearMonth(1992, 1).plus(383) == YearMonth(2023, 12)

    @pytest.mark.parametrize("bad", ["1992-13", "1992-00", "199201", "92-01", "1992-1"])
    def test_rejects_bad_periods(self, bad):
        with pytest.raises(ValueError):
            YearMonth.parse(bad)


class TestMonthlySeries:
    def test_end_and_window(self):
        s = series(np.arange(24.0), start=YearMonth(2020, 1))
        assert s.end == YearMonth(2021, 12)
        w = s.window(YearMonth(2020, 3), YearMonth(2020, 5))
        assert list(w) == [2.0, 3.0, 4.0]

    def test_values_are_read_only(self):
        s = series([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            s.values[0] = 9.0

    def test_rejects_negative_demand(self):
        with pytest.raises(ValueError):
            series([1.0, -2.0])

    def test_production_may_be_negative(self):
        s = series([1.0, -2.0], kind=Kind.PRODUCTION)
        assert s.values[1] == -2.0

    def test_too_short(self):
        with pytest.raises(TooShort):
            series([1.0])


class TestLogDiff:
    def test_geometric_ratio(self):
        out = log_diff([100, 110, 121])
        assert out == pytest.approx([math.log(1.1)] * 2, abs=1e-12)

    def test_constant(self):
        assert log_diff([5, 5, 5, 5]) == pytest.approx([0, 0, 0], abs=0)

    def test_mixed_direction(self):
        # ln(90/100), ln(108/90) evaluated independently
        out = log_diff([100, 90, 108])
        assert out == pytest.approx(
            [-0.10536051565782628, 0.1823215567939546], abs=1e-12
        )

    def test_errors(self):
        with pytest.raises(NonPositiveValue):
            log_diff([1.0, 0.0, 2.0])
        with pytest.raises(TooShort):
            log_diff([1.0])

    def test_geometric_series_property(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            ratio = rng.uniform(0.5, 2.0)
            x0 = rng.uniform(1, 100)
            x = x0 * ratio ** np.arange(20)
            out = log_diff(x)
            assert np.max(np.abs(out - math.log(ratio))) < 1e-12


class TestSampleVariance:
    def test_zero_spread(self):
        assert sample_variance([3, 3, 3]) == 0

    def test_two_points(self):
        assert sample_variance([1, -1]) == pytest.approx(2.0, abs=1e-15)

    def test_brute_force_value(self):
        # sum of squared deviations computed by hand: 32 / 7
        assert sample_variance([2, 4, 4, 4, 5, 5, 7, 9]) == pytest.approx(
            32 / 7, abs=1e-12
        )

    def test_too_short(self):
        with pytest.raises(TooShort):
            sample_variance([1.0])

    def test_matches_brute_force_loops(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            x = rng.normal(size=rng.integers(2, 40))
            m = sum(x) / len(x)
            brute = sum((v - m) ** 2 for v in x) / (len(x) - 1)
            assert sample_variance(x) == pytest.approx(brute, rel=1e-12, abs=1e-15)


class TestDecomposition:
    def test_constant_series(self):
        s = series(np.full(36, 7.0))
        d = decompose_additive(s)
        defined = ~np.isnan(d.trend)
        assert np.allclose(d.trend[defined], 7.0)
        assert np.allclose(d.seasonal, 0.0)
        assert np.allclose(d.residual[defined], 0.0)

    def test_sinusoid_residual_bound(self):
        t = np.arange(120)
        s = series(np.sin(2 * np.pi * t / 12) + 10)
        d = decompose_additive(s)
        defined = ~np.isnan(d.trend)
        assert np.nanmax(np.abs(d.residual[defined])) <= 1e-6

    def test_linear_ramp(self):
        t = np.arange(48.0)
        d = decompose_additive(series(t))
        defined = np.flatnonzero(~np.isnan(d.trend))
        assert np.allclose(d.trend[defined], defined.astype(float), atol=1e-9)
        assert np.max(np.abs(d.seasonal)) <= 1e-9

    def test_boundary_positions_undefined(self):
        d = decompose_additive(series(np.arange(40.0)))
        assert np.all(np.isnan(d.trend[:6])) and np.all(np.isnan(d.trend[-6:]))
        assert not np.any(np.isnan(d.trend[6:-6]))

    def test_seasonal_sums_to_zero_and_reconstructs(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            n = int(rng.integers(24, 200))
            t = np.arange(n)
            x = (
                rng.uniform(50, 150)
                + rng.uniform(-0.5, 0.5) * t
                + rng.uniform(0, 10) * np.sin(2 * np.pi * t / 12 + rng.uniform(0, 6))
                + rng.normal(0, 1, n)
            )
            d = decompose_additive(x, period=12)
            assert abs(d.seasonal.sum()) <= 1e-9
            defined = ~np.isnan(d.trend)
            recon = d.trend + d.seasonal[np.arange(n) % 12] + d.residual
            assert np.allclose(recon[defined], x[defined], atol=1e-9)

    def test_too_short(self):
        with pytest.raises(TooShort):
            decompose_additive(series(np.ones(23)))


class TestRecompose:
    def test_round_trip_identity(self):
        rng = np.random.default_rng(3)
        x = 100 + rng.normal(0, 5, 60)
        s = series(x)
        d = decompose_additive(s)
        back = recompose(d, d.residual)
        defined = ~np.isnan(d.trend)
        assert np.allclose(back[defined], x[defined], atol=1e-9)

    def test_zero_input_gives_trend_plus_seasonal(self):
        d = decompose_additive(series(np.arange(48.0) + 30))
        out = recompose(d, np.zeros(48))
        expect = d.trend + d.seasonal[np.arange(48) % 12]
        defined = ~np.isnan(d.trend)
        assert np.allclose(out[defined], expect[defined], atol=1e-12)

    def test_forecast_offset_on_sinusoid(self):
        t = np.arange(120)
        base = 10 + np.sin(2 * np.pi * t / 12)
        d = decompose_additive(series(base))
        fc = recompose(d, np.full(12, 0.1), start=120)
        future_t = np.arange(120, 132)
        expect = 10 + np.sin(2 * np.pi * future_t / 12) + 0.1
        assert np.allclose(fc, expect, atol=1e-3)

    def test_length_mismatch(self):
        d = decompose_additive(series(np.arange(48.0) + 5))
        with pytest.raises(LengthMismatch):
            recompose(d, np.zeros(10))

    def test_detrend_is_inverse(self):
        rng = np.random.default_rng(5)
        x = 50 + np.arange(72) * 0.3 + rng.normal(0, 2, 72)
        d = decompose_additive(x, period=12)
        resid = detrend_deseasonalize(d, x)
        back = recompose(d, resid[6:], start=6)
        assert np.allclose(back, x[6:], atol=1e-9)


class TestMinMax:
    def test_fit_and_apply(self):
        r = minmax_fit([2, 4, 6])
        assert (r.lo, r.hi) == (2, 6)
        assert minmax_apply([2, 4, 6], r) == pytest.approx([0, 0.5, 1])

    def test_invert_round_trip(self):
        r = MinMaxRecipe(2, 6)
        assert minmax_invert([0, 0.5, 1], r) == pytest.approx([2, 4, 6])

    def test_negative_lo(self):
        r = minmax_fit([-1, 0, 3])
        assert minmax_apply([-1, 0, 3], r) == pytest.approx([0, 0.25, 1])

    def test_degenerate(self):
        with pytest.raises(DegenerateRange):
            minmax_fit([3, 3, 3])

    def test_round_trip_property(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            x = rng.normal(0, rng.uniform(0.1, 100), size=rng.integers(2, 50))
            if x.max() == x.min():
                continue
            r = minmax_fit(x)
            assert np.allclose(minmax_invert(minmax_apply(x, r), r), x, atol=1e-12)


class TestLogRoundTrip:
    def test_exp_log_identity(self):
        rng = np.random.default_rng(19)
        x = rng.uniform(0.01, 1e6, 500)
        assert np.allclose(np.exp(log_values(x)), x, rtol=1e-12)

    def test_log_rejects_nonpositive(self):
        with pytest.raises(NonPositiveValue):
            log_values([1.0, 0.0])
