"""Seasonal ARIMA: conditional-sum-of-squares estimation and forecasting.

The model for the differenced series w_t (regular order d, seasonal order D
at period m) is

    (1 - sum phi_i L^i)(1 - sum Phi_i L^{i*m}) w_t
        = c + (1 + sum theta_i L^i)(1 + sum Theta_i L^{i*m}) eps_t

Estimation minimizes the conditional sum of squared one-step residuals
(pre-sample residuals zeroed) with a derivative-free simplex search started
at the origin. The intercept c is estimated only for undifferenced models
(d + D == 0), so e.g. a (0,1,0) model forecasts flat at the last level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import NonConvergence, TooShort
from .series import SeriesLike, _values

MAX_ITER = 2000
REL_TOL = 1e-10
_ROOT_MARGIN = 1.001  # keep polynomial roots strictly outside the unit circle


@dataclass(frozen=True)
class SarimaSpec:
    p: int
    d: int
    q: int
    P: int = 0
    D: int = 0
    Q: int = 0
    m: int = 12

    def __post_init__(self):
        for name in ("p", "d", "q", "P", "D", "Q"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.d + self.D > 2:
            raise ValueError("total differencing d + D must be <= 2")
        if max(self.p, self.q, self.P, self.Q) > 3:
            raise ValueError("orders above 3 are outside the supported grid")
        if self.m < 1:
            raise ValueError("seasonal period m must be >= 1")

    @property
    def has_intercept(self) -> bool:
        return self.d + self.D == 0

    @property
    def k_params(self) -> int:
        return self.p + self.q + self.P + self.Q + (1 if self.has_intercept else 0)

    @property
    def ar_span(self) -> int:
        return self.p + self.m * self.P

    def as_tuple(self) -> tuple[int, ...]:
        return (self.p, self.d, self.q, self.P, self.D, self.Q, self.m)

    def __str__(self) -> str:
        return f"({self.p},{self.d},{self.q})({self.P},{self.D},{self.Q}){self.m}"


def _expand(regular: Sequence[float], seasonal: Sequence[float], m: int,
            sign: float) -> np.ndarray:
    """Coefficients of (1 + sign*sum a_i L^i)(1 + sign*sum A_i L^{i*m})."""
    reg = np.zeros(len(regular) + 1)
    reg[0] = 1.0
    reg[1:] = sign * np.asarray(regular, float)
    sea = np.zeros(len(seasonal) * m + 1)
    sea[0] = 1.0
    for i, a in enumerate(seasonal, start=1):
        sea[i * m] = sign * a
    return np.convolve(reg, sea)


def _poly_roots_ok(coefs: np.ndarray, margin: float = 1.0) -> bool:
    """True when all roots of 1 + c1 L + ... lie outside |z| = margin."""
    if len(coefs) <= 1:
        return True
    trimmed = np.trim_zeros(coefs, "b")
    if len(trimmed) <= 1:
        return True
    roots = np.roots(trimmed[::-1])
    return bool(np.all(np.abs(roots) > margin))


def _flip_roots(coefs: Sequence[float], sign: float, m: int = 1) -> np.ndarray:
    """Reflect inside-unit-circle roots of 1 + sign*sum c_i u^i to the outside.

    Returns the c_i (without the leading 1), in the plain lag variable u.
    """
    c = np.asarray(coefs, float)
    if len(c) == 0:
        return c
    poly = np.concatenate([[1.0], sign * c])
    trimmed = np.trim_zeros(poly, "b")
    if len(trimmed) <= 1:
        return c
    roots = np.roots(trimmed[::-1])
    bad = np.abs(roots) < 1.0
    if not bad.any():
        return c
    roots[bad] = 1.0 / np.conj(roots[bad])
    rebuilt = np.poly(roots)           # monic, highest power first
    rebuilt = rebuilt / rebuilt[-1]    # constant term back to 1
    full = np.real(rebuilt[::-1])
    out = np.zeros(len(c))
    out[: len(full) - 1] = sign * full[1:]
    return out


@dataclass(frozen=True)
class SarimaModel:
    spec: SarimaSpec
    phi: tuple[float, ...] = ()
    theta: tuple[float, ...] = ()
    Phi: tuple[float, ...] = ()
    Theta: tuple[float, ...] = ()
    intercept: float = 0.0
    sigma2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(v) for v in self.phi))
        object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))
        object.__setattr__(self, "Phi", tuple(float(v) for v in self.Phi))
        object.__setattr__(self, "Theta", tuple(float(v) for v in self.Theta))
        s = self.spec
        if (len(self.phi), len(self.theta), len(self.Phi), len(self.Theta)) != (
            s.p, s.q, s.P, s.Q,
        ):
            raise ValueError("coefficient lengths do not match the spec orders")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")
        for coefs, label in ((self.ar_coefs(), "AR"), (self.ma_coefs(), "MA")):
            poly = np.concatenate([[1.0], -coefs]) if label == "AR" else np.concatenate([[1.0], coefs])
            if not _poly_roots_ok(poly):
                raise ValueError(f"{label} polynomial has roots inside the unit circle")

    def ar_coefs(self) -> np.ndarray:
        """alpha_j in w_t = c + sum alpha_j w_{t-j} + eps_t + sum beta_j eps_{t-j}."""
        poly = _expand(self.phi, self.Phi, self.spec.m, sign=-1.0)
        return -poly[1:]

    def ma_coefs(self) -> np.ndarray:
        """beta_j in the representation above."""
        poly = _expand(self.theta, self.Theta, self.spec.m, sign=+1.0)
        return poly[1:]


def difference(x: SeriesLike, d: int, D: int, m: int) -> np.ndarray:
    w, _ = _difference_stages(_values(x), d, D, m)
    return w


def _difference_stages(x: np.ndarray, d: int, D: int, m: int):
    """Apply regular then seasonal differencing, keeping each pre-diff series."""
    stages = []
    cur = np.asarray(x, float)
    for _ in range(d):
        stages.append((1, cur))
        cur = cur[1:] - cur[:-1]
    for _ in range(D):
        if len(cur) <= m:
            raise TooShort(f"series too short for seasonal differencing at m={m}")
        stages.append((m, cur))
        cur = cur[m:] - cur[:-m]
    return cur, stages


def _integrate(forecasts: np.ndarray, stages) -> np.ndarray:
    fc = np.asarray(forecasts, float)
    for lag, pre in reversed(stages):
        ext = list(pre[-lag:])
        out = np.empty(len(fc))
        for i, v in enumerate(fc):
            nxt = v + ext[-lag]
            ext.append(nxt)
            out[i] = nxt
        fc = out
    return fc


def _residuals(w: np.ndarray, ar: np.ndarray, ma: np.ndarray, c: float) -> np.ndarray:
    """One-step residuals, conditional on zero pre-sample residuals."""
    n_ar = len(ar)
    n = len(w)
    if n <= n_ar:
        raise TooShort(f"need more than {n_ar} differenced observations, got {n}")
    ar_poly = np.concatenate([[1.0], -ar])
    z = np.convolve(w, ar_poly)[n_ar:n] - c
    ma_terms = [(j + 1, b) for j, b in enumerate(ma) if b != 0.0]
    if not ma_terms:
        return z
    eps = np.zeros(n)
    start = n_ar
    zl = z.tolist()
    for t in range(start, n):
        acc = zl[t - start]
        for lag, b in ma_terms:
            if t - lag >= start:
                acc -= b * eps[t - lag]
        eps[t] = acc
    return eps[start:]


def css_objective(model: SarimaModel, series: SeriesLike) -> float:
    """Conditional sum of squared residuals of the model on the series."""
    s = model.spec
    w = difference(series, s.d, s.D, s.m)
    eps = _residuals(w, model.ar_coefs(), model.ma_coefs(), model.intercept)
    return float(eps @ eps)


def _split_params(vec: np.ndarray, spec: SarimaSpec):
    p, q, P, Q = spec.p, spec.q, spec.P, spec.Q
    phi = vec[:p]
    theta = vec[p : p + q]
    Phi = vec[p + q : p + q + P]
    Theta = vec[p + q + P : p + q + P + Q]
    c = vec[-1] if spec.has_intercept else 0.0
    return phi, theta, Phi, Theta, float(c)


def _coef_polys_ok(phi, theta, Phi, Theta) -> bool:
    for coefs, sign in ((phi, -1.0), (Phi, -1.0), (theta, +1.0), (Theta, +1.0)):
        if len(coefs) == 0:
            continue
        poly = np.concatenate([[1.0], sign * np.asarray(coefs, float)])
        if not _poly_roots_ok(poly, margin=_ROOT_MARGIN):
            return False
    return True


def fit_sarima(series: SeriesLike, spec: SarimaSpec) -> SarimaModel:
    """Estimate coefficients by CSS with a simplex search from the origin.

    Stationarity/invertibility is enforced by penalizing invalid parameter
    vectors during the search and flipping any offending roots afterwards.
    """
    x = _values(series)
    min_len = 3 * (spec.p + spec.q + spec.m * (spec.P + spec.Q) + 1)
    if len(x) < min_len:
        raise TooShort(f"need >= {min_len} observations for {spec}, got {len(x)}")
    w = difference(x, spec.d, spec.D, spec.m)
    if len(w) <= spec.ar_span:
        raise TooShort(f"differenced series too short for {spec}")

    n_free = spec.k_params
    if n_free == 0:
        eps = _residuals(w, np.zeros(0), np.zeros(0), 0.0)
        return SarimaModel(spec=spec, sigma2=float(eps @ eps) / len(eps))

    def objective(vec):
        phi, theta, Phi, Theta, c = _split_params(vec, spec)
        if not _coef_polys_ok(phi, theta, Phi, Theta):
            return 1e12 * (1.0 + float(np.sum(vec**2)))
        ar = -_expand(phi, Phi, spec.m, sign=-1.0)[1:]
        ma = _expand(theta, Theta, spec.m, sign=+1.0)[1:]
        eps = _residuals(w, ar, ma, c)
        return float(eps @ eps)

    x0 = np.zeros(n_free)
    f0 = objective(x0)
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": MAX_ITER,
            "maxfev": 4 * MAX_ITER,
            "xatol": 1e-8,
            "fatol": REL_TOL * max(1.0, f0),
            "adaptive": n_free > 4,
        },
    )
    best = res.x if res.fun <= f0 else x0
    phi, theta, Phi, Theta, c = _split_params(np.asarray(best, float), spec)
    phi = _flip_roots(phi, sign=-1.0)
    Phi = _flip_roots(Phi, sign=-1.0)
    theta = _flip_roots(theta, sign=+1.0)
    Theta = _flip_roots(Theta, sign=+1.0)
    ar = -_expand(phi, Phi, spec.m, sign=-1.0)[1:]
    ma = _expand(theta, Theta, spec.m, sign=+1.0)[1:]
    eps = _residuals(w, ar, ma, c)
    model = SarimaModel(
        spec=spec,
        phi=tuple(phi),
        theta=tuple(theta),
        Phi=tuple(Phi),
        Theta=tuple(Theta),
        intercept=c,
        sigma2=float(eps @ eps) / len(eps),
    )
    if not res.success:
        raise NonConvergence(f"simplex hit iteration budget for {spec}", best=model)
    return model


def default_grid(d: int, m: int = 12, seasonal: bool = True) -> list[SarimaSpec]:
    """The order grid searched by :func:`select_sarima`."""
    specs = []
    seasonal_orders = [0, 1] if seasonal else [0]
    for p in range(3):
        for q in range(3):
            for P in seasonal_orders:
                for Q in seasonal_orders:
                    for D in seasonal_orders:
                        specs.append(SarimaSpec(p, d, q, P, D, Q, m))
    return specs


def select_sarima(series: SeriesLike, grid: Iterable[SarimaSpec]) -> SarimaSpec:
    """Pick the grid spec minimizing AIC = n*ln(CSS/n) + 2k.

    Ties go to the spec with fewest parameters, then to the lexicographically
    smallest (p, d, q, P, D, Q). Grid cells whose fit fails are skipped.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty order grid")
    x = _values(series)
    best = None
    for spec in grid:
        try:
            model = fit_sarima(x, spec)
        except (TooShort, NonConvergence):
            continue
        w = difference(x, spec.d, spec.D, spec.m)
        n_eff = len(w) - spec.ar_span
        css = max(css_objective(model, x), 1e-300)
        aic = n_eff * np.log(css / n_eff) + 2 * spec.k_params
        key = (aic, spec.k_params, spec.as_tuple())
        if best is None or key < best[0]:
            best = (key, spec)
    if best is None:
        raise NonConvergence("no grid cell could be fitted")
    return best[1]


def forecast_sarima(model: SarimaModel, history: SeriesLike, horizon: int) -> np.ndarray:
    """Iterated one-step forecasts, integrated back to the level scale."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if horizon == 0:
        return np.zeros(0)
    s = model.spec
    x = _values(history)
    w, stages = _difference_stages(x, s.d, s.D, s.m)
    ar = model.ar_coefs()
    ma = model.ma_coefs()
    eps_obs = _residuals(w, ar, ma, model.intercept)
    eps_full = np.concatenate([np.zeros(s.ar_span), eps_obs, np.zeros(horizon)])
    w_ext = np.concatenate([w, np.zeros(horizon)])
    n = len(w)
    for h in range(horizon):
        t = n + h
        val = model.intercept
        for j, a in enumerate(ar, start=1):
            if a != 0.0 and t - j >= 0:
                val += a * w_ext[t - j]
        for j, b in enumerate(ma, start=1):
            if b != 0.0 and t - j < n:
                val += b * eps_full[t - j]
        w_ext[t] = val
    return _integrate(w_ext[n:], stages)


def simulate_sarima(model: SarimaModel, n: int, seed: int, burn: int = 200,
                    scale: float = 1.0) -> np.ndarray:
    """Simulate a series from the model (for recovery tests and fixtures)."""
    s = model.spec
    rng = np.random.default_rng(seed)
    ar = model.ar_coefs()
    ma = model.ma_coefs()
    total = n + burn
    eps = rng.normal(0.0, scale, total)
    w = np.zeros(total)
    for t in range(total):
        val = model.intercept + eps[t]
        for j, a in enumerate(ar, start=1):
            if a != 0.0 and t - j >= 0:
                val += a * w[t - j]
        for j, b in enumerate(ma, start=1):
            if b != 0.0 and t - j >= 0:
                val += b * eps[t - j]
        w[t] = val
    w = w[burn:]
    for _ in range(s.D):
        acc = np.zeros(len(w))
        for k in range(len(w)):
            acc[k] = w[k] + (acc[k - s.m] if k >= s.m else 0.0)
        w = acc
    for _ in range(s.d):
        w = np.cumsum(w)
    return w


def model_to_json(model: SarimaModel) -> str:
    rec = {
        "spec": list(model.spec.as_tuple()),
        "phi": list(model.phi),
        "theta": list(model.theta),
        "Phi": list(model.Phi),
        "Theta": list(model.Theta),
        "intercept": model.intercept,
        "sigma2": model.sigma2,
    }
    return json.dumps(rec, sort_keys=True)


def model_from_json(text: str) -> SarimaModel:
    rec = json.loads(text)
    p, d, q, P, D, Q, m = rec["spec"]
    return SarimaModel(
        spec=SarimaSpec(p, d, q, P, D, Q, m),
        phi=tuple(rec["phi"]),
        theta=tuple(rec["theta"]),
        Phi=tuple(rec["Phi"]),
        Theta=tuple(rec["Theta"]),
        intercept=rec["intercept"],
        sigma2=rec["sigma2"],
    )
