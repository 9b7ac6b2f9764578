"""Lag regression for multi-signal panels: compact form, OLS, penalized fits.

A panel with k components and lag order p is rewritten as Y = Phi Z + U,
where column t of Y is the demeaned observation at cycle t and column t of
Z stacks the p preceding demeaned observations, most recent first. The
intercept is recovered from the component means afterwards, so it is never
penalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, RankDeficiencyError
from .fista import FistaSettings, fista_fit_row, step_size
from .prox import PENALTY_FAMILIES
from .validation import as_float_array, check_finite

DEFAULT_GRID_SIZE = 20
DEFAULT_GRID_DEPTH = 1000.0


@dataclass(frozen=True)
class RegressionForm:
    """Compact regression view of a panel at lag order p.

    y has shape (k, T_eff) and z has shape (k*p, T_eff) with T_eff = T - p.
    ``offsets`` holds the per-component means removed from both sides.
    """

    y: np.ndarray
    z: np.ndarray
    n_lags: int
    offsets: np.ndarray

    @property
    def n_components(self) -> int:
        return self.y.shape[0]

    @property
    def n_effective(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family plus an optional tuning grid (descending, >= 0)."""

    family: str = "none"
    lambda_grid: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in PENALTY_FAMILIES:
            raise DataError(f"unknown penalty family {self.family!r}, "
                            f"expected one of {PENALTY_FAMILIES}")
        if self.lambda_grid is not None:
            grid = as_float_array(self.lambda_grid, "lambda_grid")
            if grid.ndim != 1 or grid.size == 0:
                raise DataError("lambda_grid must be a non-empty 1-D array")
            check_finite(grid, "lambda_grid")
            if np.any(grid < 0.0):
                raise DataError("lambda_grid values must be >= 0")
            if np.any(np.diff(grid) >= 0.0):
                raise DataError("lambda_grid must be strictly decreasing")
            grid = grid.copy()
            grid.setflags(write=False)
            object.__setattr__(self, "lambda_grid", grid)


@dataclass(frozen=True)
class CoefficientSet:
    """Fitted intercept, lag matrices, and residual covariance.

    ``lag_matrices[l - 1][i, j]`` multiplies series j observed l cycles back
    when predicting series i.
    """

    intercept: np.ndarray
    lag_matrices: np.ndarray
    resid_cov: np.ndarray
    penalty: str = "none"
    lam: float | None = None
    n_iter: tuple[int, ...] | None = None

    @property
    def n_components(self) -> int:
        return self.intercept.shape[0]

    @property
    def n_lags(self) -> int:
        return self.lag_matrices.shape[0]

    def row_matrix(self) -> np.ndarray:
        """Coefficients as a (k, k*p) matrix of lag-major rows."""
        p, k, _ = self.lag_matrices.shape
        return np.transpose(self.lag_matrices, (1, 0, 2)).reshape(k, k * p)


def _component_matrix(panel) -> np.ndarray:
    values = getattr(panel, "values", panel)
    arr = as_float_array(values, "panel")
    if arr.ndim != 2:
        raise DataError(f"panel values must be 2-D, got shape {arr.shape}")
    return check_finite(arr, "panel")


def build_regression(panel, p: int) -> RegressionForm:
    """Demean a (k, T) panel and assemble the compact lag regression."""
    vals = _component_matrix(panel)
    k, t_len = vals.shape
    if p < 1:
        raise DataError(f"lag order p={p} must be >= 1")
    if t_len <= p:
        raise DataError(f"lag order p={p} needs more than p observations, "
                        f"panel has T={t_len}")
    offsets = vals.mean(axis=1)
    centered = vals - offsets[:, None]
    y = centered[:, p:]
    z = np.vstack([centered[:, p - lag:t_len - lag] for lag in range(1, p + 1)])
    return RegressionForm(y=y, z=z, n_lags=p, offsets=offsets)


def _assemble(reg: RegressionForm, rows: np.ndarray, penalty: str,
              lam: float | None, n_iter: tuple[int, ...] | None) -> CoefficientSet:
    k = reg.n_components
    p = reg.n_lags
    lag_matrices = rows.reshape(k, p, k).transpose(1, 0, 2).copy()
    resid = reg.y - rows @ reg.z
    # Denominator guard: penalized fits remain defined when T_eff <= k*p.
    dof = max(reg.n_effective - k * p, 1)
    resid_cov = resid @ resid.T / dof
    intercept = reg.offsets - lag_matrices.sum(axis=0) @ reg.offsets
    return CoefficientSet(intercept=intercept, lag_matrices=lag_matrices,
                          resid_cov=resid_cov, penalty=penalty, lam=lam,
                          n_iter=n_iter)


def fit_ols(reg: RegressionForm) -> CoefficientSet:
    """Least-squares fit Phi = Y Z' (Z Z')^-1 with a rank check."""
    kp, t_eff = reg.z.shape
    if t_eff < kp:
        raise RankDeficiencyError(
            f"need T_eff >= k*p regressors: T_eff={t_eff} < {kp}")
    gram = reg.z @ reg.z.T
    eigvals, eigvecs = np.linalg.eigh(gram)
    tol = eigvals[-1] * kp * np.finfo(float).eps
    if eigvals[-1] <= 0.0 or eigvals[0] <= tol:
        weakest = int(np.argmax(np.abs(eigvecs[:, 0])))
        lag, comp = divmod(weakest, reg.n_components)
        raise RankDeficiencyError(
            f"regressors are rank deficient: component {comp} at lag {lag + 1} "
            f"is linearly dependent (eigenvalue {eigvals[0]:.3e})")
    rows = np.linalg.solve(gram, reg.z @ reg.y.T).T
    return _assemble(reg, rows, penalty="none", lam=None, n_iter=None)


def lambda_max(reg: RegressionForm) -> float:
    """Smallest penalty weight at which every coefficient row fits to zero.

    At the zero row the gradient of the squared-error term is -Z y_i', so
    the row stays at zero once lambda reaches the max-norm of Z y_i'. The
    nested-group cascade thresholds elementwise at least as hard, so the
    same bound holds for both penalty families.
    """
    return float(np.max(np.abs(reg.z @ reg.y.T)))


def make_lambda_grid(reg: RegressionForm, size: int = DEFAULT_GRID_SIZE,
                     depth: float = DEFAULT_GRID_DEPTH,
                     include_zero: bool = True) -> np.ndarray:
    """Log-spaced grid from lambda_max down to lambda_max / depth.

    A final zero is appended so the unpenalized fit is always a candidate
    during tuning.
    """
    if size < 1:
        raise DataError(f"grid size {size} must be >= 1")
    if depth <= 1.0:
        raise DataError(f"grid depth {depth} must be > 1")
    top = lambda_max(reg)
    if top == 0.0:
        return np.array([0.0])
    grid = np.geomspace(top, top / depth, num=size)
    if include_zero:
        grid = np.append(grid, 0.0)
    return grid


def fit_penalized(reg: RegressionForm, penalty: PenaltySpec | str,
                  lam: float, settings: FistaSettings | None = None,
                  init: np.ndarray | None = None) -> CoefficientSet:
    """Penalized fit of all coefficient rows at one penalty weight.

    Rows are solved independently; ``init`` (a (k, k*p) row matrix) warm
    starts each row, which makes sweeps down a lambda grid cheap.
    """
    if isinstance(penalty, str):
        penalty = PenaltySpec(family=penalty)
    if lam < 0.0:
        raise DataError(f"lambda={lam} must be >= 0")
    settings = settings or FistaSettings()
    step = step_size(reg.z)
    k = reg.n_components
    rows = np.empty((k, reg.z.shape[0]))
    iters = []
    for i in range(k):
        x0 = None if init is None else init[i]
        rows[i], info = fista_fit_row(reg.y[i], reg.z, penalty.family, lam,
                                      reg.n_lags, settings=settings,
                                      step=step, x0=x0)
        iters.append(info.n_iter)
    return _assemble(reg, rows, penalty=penalty.family, lam=lam,
                     n_iter=tuple(iters))


def predict_one_step(model: CoefficientSet, history) -> np.ndarray:
    """One-step-ahead forecast from the last p rows of a (t, k) history."""
    hist = as_float_array(history, "history")
    if hist.ndim == 1:
        hist = hist[None, :]
    p = model.n_lags
    k = model.n_components
    if hist.ndim != 2 or hist.shape[1] != k:
        raise DataError(f"history must be (t, {k}), got shape {hist.shape}")
    if hist.shape[0] < p:
        raise DataError(f"history has {hist.shape[0]} rows, need at least p={p}")
    check_finite(hist, "history")
    pred = model.intercept.copy()
    for lag in range(1, p + 1):
        pred += model.lag_matrices[lag - 1] @ hist[-lag]
    return pred
