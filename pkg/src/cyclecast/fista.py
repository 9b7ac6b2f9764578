"""Accelerated proximal-gradient solver for one coefficient row.

Each row i of the lag-regression coefficient matrix solves

    minimize over x:  0.5 * ||y_i - Z' x||^2  +  lambda * Omega(x)

where Z is the shared (k*p, T_eff) regressor matrix. Rows are independent,
so a full fit is a loop (or fan-out) over rows. The step size is the
reciprocal of the squared largest singular value of Z, and the momentum
weight at iteration r is (r - 2) / (r + 1) with zero momentum at the first
iteration. A safeguard keeps the objective sequence non-increasing: if an
accelerated step would raise the objective, the iterate falls back to a
plain proximal-gradient step from the current point and the momentum
schedule restarts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, NumericalError
from .prox import PENALTY_FAMILIES, apply_prox, penalty_value


@dataclass(frozen=True)
class FistaSettings:
    """Stopping rule for the row solver.

    The solver stops when the objective decrease over one iteration drops
    below ``tol * max(1, objective)`` or after ``max_iter`` iterations.
    """

    max_iter: int = 10_000
    tol: float = 1e-8

    def __post_init__(self):
        if self.max_iter < 1:
            raise DataError(f"max_iter={self.max_iter} must be >= 1")
        if not (self.tol > 0.0):
            raise DataError(f"tol={self.tol} must be > 0")


@dataclass
class FistaInfo:
    """Per-row solve diagnostics."""

    n_iter: int
    converged: bool
    objectives: list[float] = field(default_factory=list)


def leading_eigenvalue(gram: np.ndarray, tol: float = 1e-6,
                       max_iter: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    n = gram.shape[0]
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = gram @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        new_est = float(v @ (gram @ v))
        if abs(new_est - est) <= tol * abs(new_est):
            return new_est
        est = new_est
    return est


def step_size(z: np.ndarray) -> float:
    """Fixed FISTA step 1 / sigma_1(Z)^2 from the regressor matrix."""
    lam_max = leading_eigenvalue(z @ z.T)
    if lam_max <= 0.0:
        raise DataError("regressor matrix is identically zero")
    # Slight deflation keeps the step strictly below 1/L despite the
    # power-iteration tolerance, preserving the descent guarantee.
    return 1.0 / (lam_max * (1.0 + 1e-6))


def fista_fit_row(y_row: np.ndarray, z: np.ndarray, family: str, lam: float,
                  n_lags: int, settings: FistaSettings | None = None,
                  step: float | None = None,
                  x0: np.ndarray | None = None) -> tuple[np.ndarray, FistaInfo]:
    """Solve one penalized row regression.

    Args:
        y_row: response vector of length T_eff (one row of Y).
        z: regressor matrix of shape (k*p, T_eff).
        family: "none", "lasso", or "hglasso".
        lam: penalty weight, >= 0.
        n_lags: lag count p, needed for the nested-group layout.
        settings: stopping rule; defaults to FistaSettings().
        step: fixed step size; computed from z when omitted.
        x0: warm start; zeros when omitted.

    Returns:
        The coefficient row and a FistaInfo with the iteration count and the
        objective value after every accepted iterate.
    """
    if family not in PENALTY_FAMILIES:
        raise DataError(f"unknown penalty family {family!r}")
    if lam < 0.0:
        raise DataError(f"lambda={lam} must be >= 0")
    settings = settings or FistaSettings()
    y = np.asarray(y_row, dtype=float)
    if y.ndim != 1 or z.ndim != 2 or z.shape[1] != y.size:
        raise DataError(f"incompatible shapes: y {y.shape}, Z {z.shape}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(z))):
        raise NumericalError("non-finite values in regression inputs")
    n_feat = z.shape[0]
    if step is None:
        step = step_size(z)

    def objective(x):
        resid = y - x @ z
        return 0.5 * float(resid @ resid) + lam * penalty_value(family, x, n_lags)

    def gradient(x):
        return (x @ z - y) @ z.T

    x = np.zeros(n_feat) if x0 is None else np.asarray(x0, dtype=float).copy()
    x_prev = x
    f_cur = objective(x)
    if not np.isfinite(f_cur):
        raise NumericalError("non-finite objective at the starting point")
    info = FistaInfo(n_iter=0, converged=False, objectives=[f_cur])
    r = 1
    it = 0
    while it < settings.max_iter:
        it += 1
        beta = (r - 2.0) / (r + 1.0)
        w = x + beta * (x - x_prev)
        cand = apply_prox(family, w - step * gradient(w), step * lam, n_lags)
        f_cand = objective(cand)
        if not np.isfinite(f_cand):
            raise NumericalError("objective diverged during iteration")
        if f_cand > f_cur:
            # Monotone safeguard: retry without momentum from the current x.
            cand = apply_prox(family, x - step * gradient(x), step * lam, n_lags)
            f_cand = objective(cand)
            if not np.isfinite(f_cand):
                raise NumericalError("objective diverged during iteration")
            r = 1
            if f_cand > f_cur + 1e-12 * max(1.0, abs(f_cur)):
                # Step estimate too long for a descent step; shorten and retry.
                step *= 0.5
                it -= 1
                continue
        x_prev, x = x, cand
        delta = f_cur - f_cand
        f_cur = f_cand
        info.objectives.append(f_cur)
        r += 1
        if delta <= settings.tol * max(1.0, abs(f_cur)):
            info.converged = True
            break
    info.n_iter = it
    return x, info
