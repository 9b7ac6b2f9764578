"""Per-signal baseline forecaster: AR fit by conditional least squares,
with an optional moving-average stage estimated by long-AR residual
regression, and order selection by an information criterion.

Cycle-length series from an actuated corridor are treated as stationary, so
no differencing is applied; callers who want it can difference beforehand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, DegenerateSeriesError, RankDeficiencyError
from .validation import check_series

LONG_AR_CAP = 20


@dataclass(frozen=True)
class ArmaModel:
    """AR and MA coefficients around a fixed mean, plus the residual variance."""

    ar: np.ndarray
    ma: np.ndarray
    mean: float
    noise_var: float

    def __post_init__(self):
        ar = np.atleast_1d(np.asarray(self.ar, dtype=float))
        ma = np.atleast_1d(np.asarray(self.ma, dtype=float)) if np.size(self.ma) \
            else np.empty(0)
        object.__setattr__(self, "ar", ar)
        object.__setattr__(self, "ma", ma)
        if ar.size + ma.size < 1:
            raise DataError("model needs at least one AR or MA coefficient")
        # exactly zero happens on noiseless synthetic series, so >= not >
        if not (self.noise_var >= 0.0):
            raise DataError(f"noise_var={self.noise_var} must be >= 0")

    @property
    def p(self) -> int:
        return self.ar.size

    @property
    def q(self) -> int:
        return self.ma.size


def _lag_design(x: np.ndarray, p: int, t0: int) -> np.ndarray:
    """Columns x[t-1], ..., x[t-p] for t = t0..len(x)-1."""
    return np.column_stack([x[t0 - lag:x.size - lag] for lag in range(1, p + 1)])


def _cls_ar(x: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Conditional least squares on a demeaned series; returns (phi, residuals)."""
    design = _lag_design(x, p, p)
    target = x[p:]
    if np.all(design == 0.0):
        raise DegenerateSeriesError("series is constant; AR fit is undefined")
    phi, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < p:
        raise RankDeficiencyError(
            f"lagged design has rank {rank} < p={p}")
    return phi, target - design @ phi


def fit_ar(series, p: int) -> ArmaModel:
    """AR(p) by conditional least squares on the demeaned series."""
    x = check_series(series, "series")
    if p < 1:
        raise DataError(f"order p={p} must be >= 1")
    if x.size <= 10 * p:
        raise DataError(f"series length {x.size} too short for p={p}; "
                        f"need more than {10 * p} observations")
    mean = float(x.mean())
    centered = x - mean
    if np.all(centered == 0.0):
        raise DegenerateSeriesError("series is constant; AR fit is undefined")
    phi, resid = _cls_ar(centered, p)
    dof = max(resid.size - p, 1)
    return ArmaModel(ar=phi, ma=np.empty(0), mean=mean,
                     noise_var=float(resid @ resid) / dof)


def fit_arma_hr(series, p: int, q: int) -> ArmaModel:
    """Two-stage fit: a long AR supplies residual proxies, then the target
    orders are estimated by regressing on lagged values and lagged proxies.

    With q = 0 this delegates to fit_ar exactly.
    """
    if q < 0:
        raise DataError(f"order q={q} must be >= 0")
    if q == 0:
        return fit_ar(series, p)
    x = check_series(series, "series")
    if p < 0:
        raise DataError(f"order p={p} must be >= 0")
    if p + q < 1:
        raise DataError("need p + q >= 1")
    mean = float(x.mean())
    centered = x - mean
    if np.all(centered == 0.0):
        raise DegenerateSeriesError("series is constant; fit is undefined")
    long_order = min(LONG_AR_CAP, x.size // 10)
    if long_order < 1:
        raise DataError(f"series length {x.size} too short for the long-AR stage")
    _, long_resid = _cls_ar(centered, long_order)
    # Proxy residuals are aligned with t = long_order .. T-1; earlier ones
    # are unavailable, so the second stage starts where all lags exist.
    proxies = np.zeros(x.size)
    proxies[long_order:] = long_resid
    t0 = max(p, long_order + q)
    if x.size - t0 <= p + q:
        raise DataError(f"series length {x.size} too short for p={p}, q={q}")
    cols = []
    if p:
        cols.append(_lag_design(centered, p, t0))
    cols.append(_lag_design(proxies, q, t0))
    design = np.hstack(cols)
    target = centered[t0:]
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < p + q:
        raise RankDeficiencyError(
            f"two-stage design has rank {rank} < p+q={p + q}")
    resid = target - design @ coef
    dof = max(resid.size - p - q, 1)
    return ArmaModel(ar=coef[:p], ma=coef[p:], mean=mean,
                     noise_var=float(resid @ resid) / dof)


def _fit_for_selection(x: np.ndarray, p: int, q: int) -> tuple[ArmaModel, int, float]:
    """Fit and return (model, effective sample size, residual sum of squares)."""
    model = fit_arma_hr(x, p, q)
    resid = _conditional_residuals(model, x)
    skip = model.p
    if model.q:
        skip = max(skip, min(LONG_AR_CAP, x.size // 10) + model.q)
    used = resid[skip:]
    return model, used.size, float(used @ used)


def _conditional_residuals(model: ArmaModel, series: np.ndarray) -> np.ndarray:
    """Residual proxies over a series, zero before lags are available."""
    x = series - model.mean
    p, q = model.p, model.q
    z = np.zeros(x.size)
    for t in range(p, x.size):
        pred = 0.0
        for i in range(p):
            pred += model.ar[i] * x[t - 1 - i]
        for j in range(q):
            if t - 1 - j >= 0:
                pred += model.ma[j] * z[t - 1 - j]
        z[t] = x[t] - pred
    return z


def select_order(series, p_max: int, q_max: int = 0) -> tuple[int, int]:
    """Pick (p, q) over 1..p_max x 0..q_max by the information criterion

        T_eff * ln(sigma^2) + 2 * (p + q)

    with ties broken toward smaller p + q, then smaller p.
    """
    x = check_series(series, "series")
    if p_max < 1:
        raise DataError(f"p_max={p_max} must be >= 1")
    if q_max < 0:
        raise DataError(f"q_max={q_max} must be >= 0")
    candidates = sorted(
        ((p, q) for p in range(1, p_max + 1) for q in range(0, q_max + 1)),
        key=lambda pq: (pq[0] + pq[1], pq[0]))
    best: tuple[int, int] | None = None
    best_aic = np.inf
    for p, q in candidates:
        try:
            _, n_eff, ss = _fit_for_selection(x, p, q)
        except (RankDeficiencyError, DegenerateSeriesError):
            continue
        if n_eff < 1:
            continue
        if ss <= 0.0:
            aic = -np.inf
        else:
            aic = n_eff * np.log(ss / n_eff) + 2.0 * (p + q)
        if aic < best_aic:
            best_aic = aic
            best = (p, q)
    if best is None:
        raise DegenerateSeriesError("no candidate order produced a valid fit")
    return best


def roll_residuals(model: ArmaModel, history) -> np.ndarray:
    """Residual proxies over a history, for use as MA regressors."""
    x = check_series(history, "history")
    return _conditional_residuals(model, x)


def predict_one_step_univ(model: ArmaModel, history,
                          residual_history=None) -> float:
    """One-step-ahead forecast: mean plus AR terms on demeaned values plus
    MA terms on residual proxies.

    When ``residual_history`` is omitted it is reconstructed from the
    history, which uses only past values.
    """
    x = check_series(history, "history")
    p, q = model.p, model.q
    if x.size < p:
        raise DataError(f"history has {x.size} entries, need at least p={p}")
    if q and residual_history is None:
        residual_history = _conditional_residuals(model, x)
    pred = model.mean
    centered = x - model.mean
    for i in range(p):
        pred += model.ar[i] * centered[-1 - i]
    if q:
        z = np.asarray(residual_history, dtype=float)
        if z.size < q:
            raise DataError(f"residual history has {z.size} entries, "
                            f"need at least q={q}")
        for j in range(q):
            pred += model.ma[j] * z[-1 - j]
    return float(pred)
