"""Out-of-sample scoring, penalty tuning, and the model comparison harness.

Tuning uses a rolling scheme on the pre-holdout data: fit on the first
segment, score one-step-ahead predictions on the second, and keep the
penalty weight with the lowest score (ties go to the heavier penalty).
The final holdout is scored with models refit on everything before it;
holdout predictions condition on true past values and are never
re-estimated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DataError
from .fista import FistaSettings
from .panel import PanelSeries
from .univariate import (ArmaModel, fit_arma_hr, predict_one_step_univ,
                         roll_residuals, select_order)
from .validation import as_float_array, check_finite
from .var import (DEFAULT_GRID_DEPTH, DEFAULT_GRID_SIZE, CoefficientSet,
                  PenaltySpec, build_regression, fit_ols, fit_penalized,
                  make_lambda_grid, predict_one_step)

MODEL_FAMILIES = ("avg", "univ", "var", "lasso", "hglasso")
AVERAGING_WINDOW = 5
MIN_SEGMENT_MARGIN = 10


def mspe(actual, predicted) -> float:
    """Mean squared prediction error over all components and steps."""
    a = as_float_array(actual, "actual")
    p = as_float_array(predicted, "predicted")
    if a.shape != p.shape:
        raise DataError(f"shape mismatch: actual {a.shape} vs predicted {p.shape}")
    if a.size == 0:
        raise DataError("cannot score an empty prediction set")
    check_finite(a, "actual")
    check_finite(p, "predicted")
    diff = a - p
    return float(np.mean(diff * diff))


@dataclass(frozen=True)
class RollingSplit:
    """Index boundaries for tuning: fit on [0, t1), score on [t1, t2)."""

    t1: int
    t2: int
    t_end: int

    def __post_init__(self):
        if not (0 < self.t1 < self.t2 < self.t_end):
            raise DataError(
                f"split must satisfy 0 < t1 < t2 < t_end, got "
                f"({self.t1}, {self.t2}, {self.t_end})")

    def check_segments(self, max_lag: int) -> None:
        need = max_lag + MIN_SEGMENT_MARGIN
        segments = (self.t1, self.t2 - self.t1, self.t_end - self.t2)
        if min(segments) < need:
            raise DataError(
                f"rolling split segments {segments} too short: each needs "
                f">= {need} cycles at lag {max_lag}")


def make_rolling_split(t_end: int, max_lag: int, frac1: float = 0.6,
                       frac2: float = 0.8) -> RollingSplit:
    """Fractional split of [0, t_end), clamped so every segment keeps at
    least max_lag + 10 cycles when the data run short."""
    if not (0.0 < frac1 < frac2 < 1.0):
        raise DataError(f"need 0 < frac1 < frac2 < 1, got ({frac1}, {frac2})")
    need = max_lag + MIN_SEGMENT_MARGIN
    if t_end < 3 * need:
        raise DataError(f"t_end={t_end} too short to split: need >= {3 * need} "
                        f"cycles at lag {max_lag}")
    t2 = min(round(frac2 * t_end), t_end - need)
    t1 = min(round(frac1 * t_end), t2 - need)
    split = RollingSplit(t1=int(t1), t2=int(t2), t_end=int(t_end))
    split.check_segments(max_lag)
    return split


def _one_step_trace(model: CoefficientSet, values: np.ndarray, start: int,
                    stop: int) -> np.ndarray:
    """One-step predictions for cycles [start, stop) given true history."""
    k = values.shape[0]
    out = np.empty((k, stop - start))
    p = model.n_lags
    for idx, t in enumerate(range(start, stop)):
        out[:, idx] = predict_one_step(model, values[:, t - p:t].T)
    return out


def lambda_path(panel, p: int, penalty: PenaltySpec, split: RollingSplit,
                settings: FistaSettings | None = None,
                grid_size: int = DEFAULT_GRID_SIZE,
                grid_depth: float = DEFAULT_GRID_DEPTH):
    """Score every grid value on the rolling split.

    Returns (grid, scores, chosen lambda). Fits warm-start down the grid.
    """
    values = panel.values if isinstance(panel, PanelSeries) else \
        as_float_array(panel, "panel")
    if split.t_end > values.shape[1]:
        raise DataError(f"split t_end={split.t_end} exceeds panel length "
                        f"{values.shape[1]}")
    split.check_segments(p)
    if penalty.family == "none":
        raise DataError("tuning requires a penalized family")
    reg = build_regression(values[:, :split.t1], p)
    grid = penalty.lambda_grid
    if grid is None:
        grid = make_lambda_grid(reg, size=grid_size, depth=grid_depth)
    scores = np.empty(grid.size)
    best_idx = 0
    init = None
    for g, lam in enumerate(grid):
        model = fit_penalized(reg, penalty, float(lam), settings=settings,
                              init=init)
        init = model.row_matrix()
        trace = _one_step_trace(model, values, split.t1, split.t2)
        scores[g] = mspe(values[:, split.t1:split.t2], trace)
        if scores[g] < scores[best_idx]:
            best_idx = g
    return grid, scores, float(grid[best_idx])


def select_lambda(panel, p: int, penalty: PenaltySpec, split: RollingSplit,
                  settings: FistaSettings | None = None,
                  grid_size: int = DEFAULT_GRID_SIZE,
                  grid_depth: float = DEFAULT_GRID_DEPTH) -> float:
    """Chosen penalty weight: the grid value minimizing the rolling score.

    The grid is descending, so on ties the larger lambda wins.
    """
    _, _, chosen = lambda_path(panel, p, penalty, split, settings=settings,
                               grid_size=grid_size, grid_depth=grid_depth)
    return chosen


@dataclass(frozen=True)
class ModelScore:
    """Holdout result for one model family at one lag order."""

    family: str
    lag: int | None
    lam: float | None
    mspe: float
    per_signal_mspe: np.ndarray
    trace: np.ndarray
    detail: object = None


@dataclass(frozen=True)
class EvaluationReport:
    """Everything run_comparison measured on one panel."""

    meta: dict
    component_labels: tuple[str, ...]
    holdout_start: int
    actual: np.ndarray
    entries: tuple[ModelScore, ...]
    intercept_mspe: float

    def entry(self, family: str, lag: int | None = None) -> ModelScore:
        for e in self.entries:
            if e.family == family and (lag is None or e.lag == lag):
                return e
        raise KeyError(f"no entry for family={family!r}, lag={lag}")


def _score(family, lag, lam, actual, trace, detail=None) -> ModelScore:
    per_signal = np.mean((actual - trace) ** 2, axis=1)
    return ModelScore(family=family, lag=lag, lam=lam,
                      mspe=float(np.mean((actual - trace) ** 2)),
                      per_signal_mspe=per_signal, trace=trace, detail=detail)


def _univ_trace(models: Sequence[ArmaModel], values: np.ndarray,
                start: int, stop: int) -> np.ndarray:
    out = np.empty((values.shape[0], stop - start))
    for i, model in enumerate(models):
        series = values[i]
        proxies = roll_residuals(model, series) if model.q else None
        for idx, t in enumerate(range(start, stop)):
            resid_hist = proxies[:t] if proxies is not None else None
            out[i, idx] = predict_one_step_univ(model, series[:t], resid_hist)
    return out


def run_comparison(panel: PanelSeries, lag_list: Sequence[int] = (1,),
                   holdout: int = 75, *, families: Sequence[str] = MODEL_FAMILIES,
                   min_train: int = 100, split_fracs: tuple[float, float] = (0.6, 0.8),
                   q_max: int = 1, grid_size: int = DEFAULT_GRID_SIZE,
                   grid_depth: float = DEFAULT_GRID_DEPTH,
                   settings: FistaSettings | None = None) -> EvaluationReport:
    """Fit every requested family at every lag and score the final holdout.

    Penalized families are tuned on the pre-holdout data with the rolling
    split, refit on all pre-holdout cycles at the chosen weight, and then
    predict the holdout one step at a time from true past values.
    """
    unknown = set(families) - set(MODEL_FAMILIES)
    if unknown:
        raise DataError(f"unknown model families: {sorted(unknown)}")
    lag_list = tuple(int(p) for p in lag_list)
    if not lag_list or min(lag_list) < 1:
        raise DataError(f"lag_list must hold positive lags, got {lag_list}")
    values = panel.values
    k, t_len = values.shape
    if holdout < 1:
        raise DataError(f"holdout={holdout} must be >= 1")
    h0 = t_len - holdout
    if h0 < min_train:
        raise DataError(
            f"insufficient data: T={t_len} leaves {h0} pre-holdout cycles, "
            f"need >= {min_train}")
    if h0 <= max(max(lag_list), AVERAGING_WINDOW):
        raise DataError("pre-holdout span shorter than the largest lag")
    actual = values[:, h0:]
    pre = values[:, :h0]
    entries: list[ModelScore] = []

    if "avg" in families:
        trace = np.empty((k, holdout))
        for idx, t in enumerate(range(h0, t_len)):
            trace[:, idx] = values[:, t - AVERAGING_WINDOW:t].mean(axis=1)
        entries.append(_score("avg", None, None, actual, trace))

    for p in lag_list:
        if "univ" in families:
            models = []
            for i in range(k):
                order = select_order(pre[i], p_max=p, q_max=q_max)
                models.append(fit_arma_hr(pre[i], *order))
            trace = _univ_trace(models, values, h0, t_len)
            entries.append(_score("univ", p, None, actual, trace,
                                  detail=tuple(models)))
        if "var" in families:
            model = fit_ols(build_regression(pre, p))
            trace = _one_step_trace(model, values, h0, t_len)
            entries.append(_score("var", p, None, actual, trace, detail=model))
        for family in ("lasso", "hglasso"):
            if family not in families:
                continue
            split = make_rolling_split(h0, p, *split_fracs)
            spec = PenaltySpec(family=family)
            lam = select_lambda(panel.window(0, h0), p, spec, split,
                                settings=settings, grid_size=grid_size,
                                grid_depth=grid_depth)
            model = fit_penalized(build_regression(pre, p), spec, lam,
                                  settings=settings)
            trace = _one_step_trace(model, values, h0, t_len)
            entries.append(_score(family, p, lam, actual, trace, detail=model))

    mu = pre.mean(axis=1)
    intercept_trace = np.repeat(mu[:, None], holdout, axis=1)
    report = EvaluationReport(
        meta=dict(panel.meta), component_labels=panel.component_labels,
        holdout_start=h0, actual=actual.copy(), entries=tuple(entries),
        intercept_mspe=mspe(actual, intercept_trace))
    return report
