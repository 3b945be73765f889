"""Augmented Dickey-Fuller unit-root testing.

The regression is

    dx_t = alpha (+ beta*t) + gamma*x_{t-1} + sum_j c_j dx_{t-j} + e_t

and the reported statistic is the OLS t-ratio of gamma. Rejection of the
unit-root null (statistic below the 5% critical value) indicates
stationarity. Critical values come from the MacKinnon (2010) response
surface; lag order is chosen by AIC over 0..floor(12*(n/100)^(1/4)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularDesign, TooShort
from .series import SeriesLike, _values

# MacKinnon (2010) response-surface coefficients: crit = b0 + b1/N + b2/N^2 + b3/N^3
_MACKINNON = {
    "constant": {
        0.01: (-3.43035, -6.5393, -16.786, -79.433),
        0.05: (-2.86154, -2.8903, -4.234, -40.040),
        0.10: (-2.56677, -1.5384, -2.809, 0.0),
    },
    "constant_trend": {
        0.01: (-3.95877, -9.0531, -28.428, -134.155),
        0.05: (-3.41049, -4.3904, -9.036, -45.374),
        0.10: (-3.12705, -2.5856, -3.925, -22.380),
    },
}

REGRESSIONS = tuple(_MACKINNON)


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lags_used: int
    crit_1: float
    crit_5: float
    crit_10: float
    reject_unit_root: bool


def critical_values(n_obs: int, regression: str = "constant") -> tuple[float, float, float]:
    """1%/5%/10% critical values for the given effective sample size."""
    table = _MACKINNON[regression]
    out = []
    for level in (0.01, 0.05, 0.10):
        b0, b1, b2, b3 = table[level]
        out.append(b0 + b1 / n_obs + b2 / n_obs**2 + b3 / n_obs**3)
    return tuple(out)


def _design(x: np.ndarray, lags: int, regression: str):
    """Dependent vector and regressor matrix for the ADF regression."""
    dx = np.diff(x)
    nobs = len(dx) - lags
    rows = np.arange(lags, len(dx))
    cols = [np.ones(nobs)]
    if regression == "constant_trend":
        cols.append(rows.astype(float) + 1.0)
    cols.append(x[rows])  # lagged level, the coefficient under test
    level_col = len(cols) - 1
    for j in range(1, lags + 1):
        cols.append(dx[rows - j])
    return dx[rows], np.column_stack(cols), level_col


def _ols_t_ratio(y: np.ndarray, X: np.ndarray, col: int) -> tuple[float, float]:
    """t-ratio of X[:, col] plus the regression SSR (for lag selection)."""
    nobs, k = X.shape
    if nobs <= k:
        raise TooShort(f"ADF regression needs more than {k} observations, got {nobs}")
    if np.linalg.matrix_rank(X) < k:
        raise SingularDesign("collinear regressors in ADF design")
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    sigma2 = ssr / (nobs - k)
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(sigma2 * xtx_inv[col, col])
    if se == 0 or not np.isfinite(se):
        raise SingularDesign("zero standard error in ADF design")
    return float(beta[col] / se), ssr


def adf_statistic(x: SeriesLike, lags: int = 0, regression: str = "constant") -> float:
    """ADF t-statistic at a fixed lag order."""
    if regression not in REGRESSIONS:
        raise ValueError(f"regression must be one of {REGRESSIONS}")
    v = _values(x)
    if not np.all(np.isfinite(v)):
        raise ValueError("series contains non-finite values")
    if len(v) <= lags + 3:
        raise TooShort(f"need more than {lags + 3} observations, got {len(v)}")
    y, X, col = _design(v, lags, regression)
    t, _ = _ols_t_ratio(y, X, col)
    return t


def max_lags(n: int) -> int:
    """Schwert rule of thumb bound for the lag search."""
    return int(np.floor(12.0 * (n / 100.0) ** 0.25))


def adf_test(x: SeriesLike, regression: str = "constant",
             level: float = 0.05) -> AdfResult:
    """ADF test with AIC lag selection and MacKinnon critical values.

    Candidate lag orders are compared on a common sample (trimmed to the
    maximum lag) so their AICs are comparable; the final statistic is then
    re-estimated at the chosen order on the maximal sample.
    """
    if regression not in REGRESSIONS:
        raise ValueError(f"regression must be one of {REGRESSIONS}")
    if level not in (0.01, 0.05, 0.10):
        raise ValueError("level must be 0.01, 0.05 or 0.10")
    v = _values(x)
    if len(v) < 24:
        raise TooShort(f"ADF with automatic lags needs >= 24 observations, got {len(v)}")
    if not np.all(np.isfinite(v)):
        raise ValueError("series contains non-finite values")

    maxlag = max_lags(len(v))
    # keep the common estimation sample comfortably larger than the design
    n_params_max = maxlag + 2 + (1 if regression == "constant_trend" else 0)
    while maxlag > 0 and len(v) - 1 - maxlag <= n_params_max + 2:
        maxlag -= 1
        n_params_max -= 1

    trimmed = v[:]  # candidates all start at index maxlag of dx for comparability
    best = None
    for lag in range(maxlag + 1):
        y, X, col = _design(trimmed, lag, regression)
        # align every candidate on the maxlag-trimmed sample
        drop = (maxlag - lag)
        y, X = y[drop:], X[drop:]
        try:
            _, ssr = _ols_t_ratio(y, X, col)
        except SingularDesign:
            if lag == 0:
                raise
            continue
        nobs, k = X.shape
        aic = nobs * np.log(max(ssr, 1e-300) / nobs) + 2 * k
        if best is None or aic < best[0]:
            best = (aic, lag)
    if best is None:
        raise SingularDesign("no ADF regression could be estimated")
    lag = best[1]

    y, X, col = _design(v, lag, regression)
    stat, _ = _ols_t_ratio(y, X, col)
    c1, c5, c10 = critical_values(len(y), regression)
    crit_at_level = {0.01: c1, 0.05: c5, 0.10: c10}[level]
    return AdfResult(
        statistic=stat,
        lags_used=lag,
        crit_1=c1,
        crit_5=c5,
        crit_10=c10,
        reject_unit_root=bool(stat < crit_at_level),
    )
