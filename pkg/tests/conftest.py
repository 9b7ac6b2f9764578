"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's own solver code paths:
the prox oracle minimizes the prox objective numerically per column, the
gradient oracle uses central finite differences, and the least-squares
oracle goes through numpy's lstsq on the raw design. Test files compare
package output against these, never against a second call into the same
routine.
"""

import numpy as np
import pytest
from scipy.optimize import minimize

from cyclecast import make_panel


# ---------------------------------------------------------------------------
# prox oracle


def penalty_lasso(v):
    return float(np.sum(np.abs(v)))


def penalty_hglasso(v, n_lags):
    """Sum, per source column, of the norms of its lag suffixes.

    v is laid out lag-major: one block of equal size per lag, lag 1 first.
    Source j's coefficient at lag l sits at index l * block + j, and each
    (source, starting lag) pair contributes the norm of lags l..p.
    """
    v = np.asarray(v, dtype=float)
    w = v.reshape(n_lags, -1)
    total = 0.0
    for j in range(w.shape[1]):
        for lag in range(n_lags):
            total += float(np.linalg.norm(w[lag:, j]))
    return total


def prox_objective(u, v, threshold, family, n_lags):
    u = np.asarray(u, dtype=float)
    fit = 0.5 * float(np.sum((u - v) ** 2))
    if family == "lasso":
        return fit + threshold * penalty_lasso(u)
    if family == "hglasso":
        return fit + threshold * penalty_hglasso(u, n_lags)
    raise ValueError(family)


def brute_force_prox(v, threshold, family, n_lags=1):
    """Minimize the prox objective by direct numerical search.

    Nelder-Mead from several starts (the input, zero, and the input shrunk
    halfway) is enough at the sizes the tests use; the best candidate is
    polished and returned.
    """
    v = np.asarray(v, dtype=float)
    starts = [v.copy(), np.zeros_like(v), 0.5 * v]
    best = None
    best_val = np.inf
    for x0 in starts:
        res = minimize(
            prox_objective,
            x0,
            args=(v, threshold, family, n_lags),
            method="Nelder-Mead",
            options={"maxiter": 20000, "xatol": 1e-10, "fatol": 1e-14},
        )
        if res.fun < best_val:
            best_val = res.fun
            best = res.x
    # one polishing pass from the incumbent
    res = minimize(
        prox_objective,
        best,
        args=(v, threshold, family, n_lags),
        method="Nelder-Mead",
        options={"maxiter": 20000, "xatol": 1e-12, "fatol": 1e-16},
    )
    if res.fun < best_val:
        best = res.x
    return np.asarray(best, dtype=float)


# ---------------------------------------------------------------------------
# gradient oracle


def finite_difference_gradient(f, x, eps=1e-6):
    """Central-difference gradient of a scalar function of a flat vector."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        bump = np.zeros_like(x)
        bump[i] = eps
        grad[i] = (f(x + bump) - f(x - bump)) / (2.0 * eps)
    return grad


# ---------------------------------------------------------------------------
# least-squares oracle


def lstsq_coefficients(y, z):
    """Row-wise unpenalized solution of min ||y - x z||^2 via numpy lstsq."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    coef, _, _, _ = np.linalg.lstsq(z.T, y.T, rcond=None)
    return coef.T


# ---------------------------------------------------------------------------
# panel builders


def var1_panel(phi, t_length, seed, mu=None, noise_scale=1.0):
    """Simulate a stationary VAR(1) panel with known coefficient matrix."""
    phi = np.asarray(phi, dtype=float)
    k = phi.shape[0]
    if mu is None:
        mu = np.full(k, 50.0)
    mu = np.asarray(mu, dtype=float)
    rng = np.random.default_rng(seed)
    burn = 200
    x = np.zeros((k, t_length + burn))
    for t in range(1, t_length + burn):
        x[:, t] = phi @ x[:, t - 1] + noise_scale * rng.standard_normal(k)
    values = x[:, burn:] + mu[:, None]
    return make_panel([values[i] for i in range(k)])


def rotation_panel(t_length=256, mu=(60.0, 55.0), amplitude=15.0, period=16):
    """Noiseless two-component rotation: exactly linear VAR(1) dynamics."""
    theta = 2.0 * np.pi / period
    rot = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    x = np.zeros((2, t_length))
    x[:, 0] = (amplitude, 0.0)
    for t in range(1, t_length):
        x[:, t] = rot @ x[:, t - 1]
    values = x + np.asarray(mu, dtype=float)[:, None]
    return make_panel([values[0], values[1]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def small_panel():
    """Fixed 3-component panel, long enough for lag-2 fits."""
    phi = np.array([[0.5, 0.1, 0.0], [0.0, 0.4, 0.2], [0.1, 0.0, 0.3]])
    return var1_panel(phi, 400, seed=11, mu=(50.0, 55.0, 60.0))
