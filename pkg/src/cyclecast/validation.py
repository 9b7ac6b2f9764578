"""Input validation helpers used by estimators and module-level functions."""

from __future__ import annotations

import numpy as np

from .exceptions import DataError


def as_float_array(x, name: str = "array") -> np.ndarray:
    """Coerce to a float ndarray, rejecting non-numeric input."""
    try:
        arr = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{name} is not numeric: {exc}") from exc
    return arr


def check_finite(arr: np.ndarray, name: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains NaN or infinite entries")
    return arr


def check_series(x, name: str = "series", min_length: int = 1) -> np.ndarray:
    """Validate a one-dimensional float series."""
    arr = as_float_array(x, name)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise DataError(f"{name} has {arr.size} entries, need at least {min_length}")
    return check_finite(arr, name)


def check_component_matrix(values, name: str = "values") -> np.ndarray:
    """Validate a (k, T) panel value matrix: 2-D, finite, strictly positive."""
    arr = as_float_array(values, name)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-D (components x cycles), got shape {arr.shape}")
    k, t = arr.shape
    if k < 1 or t < 1:
        raise DataError(f"{name} must be non-empty, got shape {arr.shape}")
    check_finite(arr, name)
    if np.any(arr <= 0.0):
        raise DataError(f"{name} must be strictly positive (cycle lengths in seconds)")
    return arr


def check_history(X, n_components: int | None = None, min_rows: int = 1,
                  name: str = "history") -> np.ndarray:
    """Validate sample-oriented history: rows are cycles, columns are signals.

    Accepts anything with a ``samples`` attribute (a panel) or a 2-D
    array-like. A 1-D array is treated as a single-component history.
    """
    if hasattr(X, "samples"):
        X = X.samples
    arr = as_float_array(X, name)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-D (cycles x signals), got shape {arr.shape}")
    if arr.shape[0] < min_rows:
        raise DataError(
            f"{name} has {arr.shape[0]} rows, need at least {min_rows}")
    if n_components is not None and arr.shape[1] != n_components:
        raise DataError(
            f"{name} has {arr.shape[1]} columns, expected {n_components}")
    return check_finite(arr, name)
