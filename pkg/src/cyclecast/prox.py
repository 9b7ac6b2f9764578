"""Closed-form proximal operators for the coefficient penalties.

Both operators act on one coefficient row of a lag regression, stored
lag-major: the first k entries multiply all series at lag 1, the next k at
lag 2, and so on up to lag p.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DataError

PENALTY_FAMILIES = ("none", "lasso", "hglasso")


def lasso_prox(x: np.ndarray, threshold: float) -> np.ndarray:
    """Elementwise soft threshold: sign(x) * max(|x| - threshold, 0)."""
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def hglasso_prox(x: np.ndarray, threshold: float, n_lags: int) -> np.ndarray:
    """Prox of the nested lag-suffix group penalty.

    For each source series j the penalty sums the Euclidean norms of the
    lag suffixes (l..p) for l = p down to 1. Its prox is a cascade of group
    soft-thresholding steps from the innermost suffix (lag p alone) outward
    to the full lag range: each step scales the suffix by
    max(1 - threshold / ||suffix||, 0), with the factor defined as 0 for a
    zero-norm suffix. Higher lags are always driven to zero no later than
    lower ones, so the surviving lag support of every (target, source) pair
    is a prefix 1..l.
    """
    x = np.asarray(x, dtype=float)
    if n_lags < 1 or x.size % n_lags != 0:
        raise DataError(
            f"row of length {x.size} does not split into {n_lags} lag blocks")
    w = x.reshape(n_lags, -1).copy()
    for lag in range(n_lags - 1, -1, -1):
        block = w[lag:, :]
        norms = np.sqrt(np.sum(block * block, axis=0))
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(norms > 0.0,
                             np.maximum(1.0 - threshold / norms, 0.0), 0.0)
        block *= scale
    return w.reshape(x.shape)


def lasso_penalty(x: np.ndarray) -> float:
    """Sum of absolute values."""
    return float(np.sum(np.abs(x)))


def hglasso_penalty(x: np.ndarray, n_lags: int) -> float:
    """Sum over sources and suffix starts l of ||coefficients at lags l..p||."""
    x = np.asarray(x, dtype=float)
    if n_lags < 1 or x.size % n_lags != 0:
        raise DataError(
            f"row of length {x.size} does not split into {n_lags} lag blocks")
    w = x.reshape(n_lags, -1)
    total = 0.0
    for lag in range(n_lags):
        block = w[lag:, :]
        total += float(np.sum(np.sqrt(np.sum(block * block, axis=0))))
    return total


def penalty_value(family: str, x: np.ndarray, n_lags: int) -> float:
    """Penalty term for one coefficient row under the given family."""
    if family == "none":
        return 0.0
    if family == "lasso":
        return lasso_penalty(x)
    if family == "hglasso":
        return hglasso_penalty(x, n_lags)
    raise DataError(f"unknown penalty family {family!r}, "
                    f"expected one of {PENALTY_FAMILIES}")


def apply_prox(family: str, x: np.ndarray, threshold: float,
               n_lags: int) -> np.ndarray:
    """Proximal step for one coefficient row under the given family."""
    if family == "none" or threshold == 0.0:
        return x
    if family == "lasso":
        return lasso_prox(x, threshold)
    if family == "hglasso":
        return hglasso_prox(x, threshold, n_lags)
    raise DataError(f"unknown penalty family {family!r}, "
                    f"expected one of {PENALTY_FAMILIES}")
