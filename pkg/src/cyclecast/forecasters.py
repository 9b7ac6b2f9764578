"""Estimator-style wrappers around the forecasting routines.

Each class follows the familiar fit/predict pattern: ``fit`` takes an
array of shape (n_cycles, n_signals) (or a PanelSeries), ``predict``
takes recent history in the same orientation and returns the next
cycle-length vector. Hyperparameters are constructor arguments so the
objects clone cleanly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import DataError
from .fista import FistaSettings
from .panel import average_last_k_forecast
from .univariate import fit_arma_hr, predict_one_step_univ, roll_residuals, select_order
from .validation import check_history
from .prox import PENALTY_FAMILIES
from .var import (PenaltySpec, build_regression, fit_ols, fit_penalized,
                  predict_one_step)


class CycleAverageForecaster(BaseEstimator):
    """Predicts the mean of the last ``window`` cycles, per signal."""

    def __init__(self, window: int = 5):
        self.window = window

    def fit(self, X, y=None):
        if int(self.window) < 1:
            raise DataError(f"window={self.window} must be >= 1")
        X = check_history(X, min_rows=int(self.window))
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        X = check_history(X, n_components=getattr(self, "n_features_in_", None),
                          min_rows=int(self.window))
        return np.array([average_last_k_forecast(X[:, i], k=int(self.window))
                         for i in range(X.shape[1])])


class ArmaPanelForecaster(BaseEstimator):
    """Independent ARMA model per signal.

    With ``p=None`` the order of each component is picked by AIC over
    p in 1..p_max, q in 0..q_max; otherwise the given (p, q) is used
    for every component.
    """

    def __init__(self, p: int | None = None, q: int | None = None,
                 p_max: int = 3, q_max: int = 1):
        self.p = p
        self.q = q
        self.p_max = p_max
        self.q_max = q_max

    def fit(self, X, y=None):
        X = check_history(X, min_rows=2)
        self.n_features_in_ = X.shape[1]
        models = []
        for i in range(X.shape[1]):
            series = X[:, i]
            if self.p is None:
                order = select_order(series, p_max=int(self.p_max),
                                     q_max=int(self.q_max))
            else:
                order = (int(self.p), int(self.q or 0))
            models.append(fit_arma_hr(series, *order))
        self.models_ = tuple(models)
        self.orders_ = tuple((m.p, m.q) for m in models)
        return self

    def predict(self, X) -> np.ndarray:
        models = getattr(self, "models_", None)
        if models is None:
            raise DataError("forecaster is not fitted")
        X = check_history(X, n_components=self.n_features_in_, min_rows=1)
        out = np.empty(len(models))
        for i, model in enumerate(models):
            series = X[:, i]
            resid = roll_residuals(model, series) if model.q else None
            out[i] = predict_one_step_univ(model, series, resid)
        return out


class VarForecaster(BaseEstimator):
    """Vector autoregression with optional sparsity penalty.

    penalty "none" solves least squares exactly; "lasso" and "hglasso"
    run the proximal-gradient solver at the fixed weight ``lam``.
    """

    def __init__(self, p: int = 1, penalty: str = "none", lam: float = 0.0,
                 max_iter: int = 10_000, tol: float = 1e-8):
        self.p = p
        self.penalty = penalty
        self.lam = lam
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        if self.penalty not in PENALTY_FAMILIES:
            raise DataError(f"penalty must be one of {PENALTY_FAMILIES}, "
                            f"got {self.penalty!r}")
        X = check_history(X, min_rows=int(self.p) + 2)
        self.n_features_in_ = X.shape[1]
        reg = build_regression(X.T, int(self.p))
        if self.penalty == "none":
            model = fit_ols(reg)
        else:
            settings = FistaSettings(max_iter=int(self.max_iter),
                                     tol=float(self.tol))
            model = fit_penalized(reg, PenaltySpec(family=self.penalty),
                                  float(self.lam), settings=settings)
        self.model_ = model
        self.coef_ = model.row_matrix()
        self.intercept_ = model.intercept.copy()
        self.resid_cov_ = model.resid_cov.copy()
        self.lambda_ = model.lam
        self.n_iter_ = model.n_iter
        return self

    def predict(self, X) -> np.ndarray:
        model = getattr(self, "model_", None)
        if model is None:
            raise DataError("forecaster is not fitted")
        X = check_history(X, n_components=self.n_features_in_,
                          min_rows=int(self.p))
        return predict_one_step(model, X)
