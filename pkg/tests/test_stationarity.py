import numpy as np
import pytest

from bullwhip.errors import SingularDesign, TooShort
from bullwhip.stationarity import (
    AdfResult,
    adf_statistic,
    adf_test,
    critical_values,
    max_lags,
)

# t-ratio of the lagged-level coefficient worked out by hand on this fixture
# before the module was written (exact rationals: gamma = -31/70, SSR = 531/35)
GOLDEN_FIXTURE = [1, 2, 1, 3, 2, 4, 3, 5, 4, 6]
GOLDEN_T = -1.1864302154801296


def oracle_t_ratio(x, lags, regression="constant"):
    """Textbook OLS assembled independently of the implementation."""
    x = np.asarray(x, float)
    dx = np.diff(x)
    rows = np.arange(lags, len(dx))
    cols = [np.ones(len(rows))]
    if regression == "constant_trend":
        cols.append(rows + 1.0)
    cols.append(x[rows])
    for j in range(1, lags + 1):
        cols.append(dx[rows - j])
    X = np.column_stack(cols)
    y = dx[rows]
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    resid = y - X @ beta
    s2 = resid @ resid / (len(y) - X.shape[1])
    cov = s2 * np.linalg.inv(X.T @ X)
    col = 2 if regression == "constant_trend" else 1
    return beta[col] / np.sqrt(cov[col, col])


class TestStatistic:
    def test_golden_fixture(self):
        assert adf_statistic(GOLDEN_FIXTURE, lags=0) == pytest.approx(GOLDEN_T, abs=1e-10)

    def test_constant_series_singular(self):
        with pytest.raises(SingularDesign):
            adf_statistic(np.full(50, 3.0), lags=0)

    def test_seeded_white_noise_strongly_rejects(self):
        rng = np.random.default_rng(2024)
        x = rng.normal(size=200)
        stat = adf_statistic(x, lags=0)
        assert stat == pytest.approx(oracle_t_ratio(x, 0), abs=1e-8)
        assert stat < -6

    def test_matches_oracle_across_lags_and_regressions(self):
        rng = np.random.default_rng(7)
        for lags in (0, 1, 3, 6):
            for regression in ("constant", "constant_trend"):
                x = np.cumsum(rng.normal(size=120)) + rng.normal(size=120)
                assert adf_statistic(x, lags, regression) == pytest.approx(
                    oracle_t_ratio(x, lags, regression), abs=1e-8
                )

    def test_too_short(self):
        with pytest.raises(TooShort):
            adf_statistic([1.0, 2.0, 3.0, 4.0], lags=1)

    def test_affine_invariance(self):
        rng = np.random.default_rng(13)
        x = np.cumsum(rng.normal(size=150))
        base = adf_statistic(x, lags=2)
        for a, b in [(2.0, 5.0), (0.3, -40.0), (1000.0, 0.0)]:
            assert adf_statistic(a * x + b, lags=2) == pytest.approx(base, abs=1e-8)


class TestAutoTest:
    def test_random_walk_keeps_unit_root(self):
        rng = np.random.default_rng(42)
        x = np.cumsum(rng.normal(size=300))
        res = adf_test(x)
        assert isinstance(res, AdfResult)
        assert not res.reject_unit_root

    def test_white_noise_rejects(self):
        rng = np.random.default_rng(98)
        res = adf_test(rng.normal(size=300))
        assert res.reject_unit_root

    def test_too_short(self):
        with pytest.raises(TooShort):
            adf_test(np.arange(10.0))

    def test_decision_matches_crit5(self):
        rng = np.random.default_rng(55)
        for seed in range(10):
            x = np.cumsum(np.random.default_rng(seed).normal(size=150))
            res = adf_test(x)
            assert res.reject_unit_root == (res.statistic < res.crit_5)
            assert res.crit_1 < res.crit_5 < res.crit_10
            assert 0 <= res.lags_used <= max_lags(150)

    def test_lag_choice_puts_statistic_on_full_sample(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=120)
        res = adf_test(x)
        assert res.statistic == pytest.approx(
            oracle_t_ratio(x, res.lags_used), abs=1e-8
        )


class TestCriticalValues:
    def test_asymptotic_levels(self):
        c1, c5, c10 = critical_values(10**9)
        assert c1 == pytest.approx(-3.43035, abs=1e-4)
        assert c5 == pytest.approx(-2.86154, abs=1e-4)
        assert c10 == pytest.approx(-2.56677, abs=1e-4)

    def test_finite_samples_are_stricter(self):
        small = critical_values(50)
        big = critical_values(5000)
        assert all(s < b for s, b in zip(small, big))

    def test_trend_case_is_stricter(self):
        c = critical_values(300, "constant")
        t = critical_values(300, "constant_trend")
        assert all(tv < cv for tv, cv in zip(t, c))

    def test_schwert_bound(self):
        assert max_lags(100) == 12
        assert max_lags(300) == 15
