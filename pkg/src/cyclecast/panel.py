"""Aligned multi-signal cycle-length panels and correlation diagnostics.

A panel holds one cycle-length series per signal, aligned on cycle index.
Signals in a corridor complete different numbers of cycles over the same
wall-clock horizon, so construction truncates every series to the shortest
one before stacking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .exceptions import DataError, DegenerateSeriesError
from .validation import check_component_matrix, check_series

DEFAULT_MAX_LAG = 20


@dataclass(frozen=True)
class PanelSeries:
    """k aligned cycle-length series over a common cycle index.

    ``values`` has shape (k, T): one row per signal ordered upstream to
    downstream, one column per cycle. Instances are immutable and the value
    matrix is marked read-only so panels can be shared freely.
    """

    values: np.ndarray
    component_labels: tuple[str, ...]
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        arr = check_component_matrix(self.values, "panel values")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        labels = tuple(str(l) for l in self.component_labels)
        if len(labels) != arr.shape[0]:
            raise DataError(
                f"{len(labels)} labels for {arr.shape[0]} components")
        if len(set(labels)) != len(labels):
            raise DataError("component labels must be unique")
        object.__setattr__(self, "component_labels", labels)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def n_components(self) -> int:
        return self.values.shape[0]

    @property
    def n_cycles(self) -> int:
        return self.values.shape[1]

    @property
    def samples(self) -> np.ndarray:
        """(T, k) view: rows are cycles, the orientation estimators expect."""
        return self.values.T

    def component(self, i: int) -> np.ndarray:
        return self.values[i]

    def window(self, start: int, stop: int) -> "PanelSeries":
        """Sub-panel over cycle indices [start, stop)."""
        if not (0 <= start < stop <= self.n_cycles):
            raise DataError(
                f"window [{start}, {stop}) out of range for T={self.n_cycles}")
        return PanelSeries(self.values[:, start:stop],
                           self.component_labels, self.meta)


def make_panel(raw_series: Sequence, labels: Sequence[str] | None = None,
               meta: Mapping[str, object] | None = None) -> PanelSeries:
    """Build a PanelSeries from per-signal cycle sequences.

    Sequences are truncated to the minimum length by dropping trailing
    entries, so cycle index t means the t-th completed cycle at every signal.
    """
    if len(raw_series) == 0:
        raise DataError("need at least one series")
    arrays = [check_series(s, f"series {i}") for i, s in enumerate(raw_series)]
    t_min = min(a.size for a in arrays)
    values = np.vstack([a[:t_min] for a in arrays])
    if labels is None:
        labels = tuple(f"s{i + 1}" for i in range(len(arrays)))
    return PanelSeries(values, tuple(labels), meta or {})


def average_last_k_forecast(history, k: int = 5) -> float:
    """Forecast the next value as the mean of the last k observations."""
    arr = check_series(history, "history")
    if k < 1:
        raise DataError(f"window k={k} must be >= 1")
    if arr.size < k:
        raise DataError(f"history has {arr.size} entries, need at least k={k}")
    return float(np.mean(arr[-k:]))


@dataclass(frozen=True)
class AcfTable:
    """Cross-correlogram for one ordered component pair (i, j).

    ``correlations[l]`` is the sample correlation between component i at
    cycle t and component j at cycle t - lags[l].
    """

    pair: tuple[int, int]
    lags: np.ndarray
    correlations: np.ndarray


def sample_acf(panel: PanelSeries, i: int, j: int,
               max_lag: int = DEFAULT_MAX_LAG) -> AcfTable:
    """Sample cross-correlation between components i and j up to max_lag.

    The lag-l value is the covariance between component i at cycle t and
    component j at cycle t - l, normalized by the product of the two sample
    standard deviations. Means and standard deviations use the full panel.
    """
    k, t_len = panel.values.shape
    if not (0 <= i < k and 0 <= j < k):
        raise DataError(f"component pair ({i}, {j}) out of range for k={k}")
    if max_lag < 0:
        raise DataError(f"max_lag={max_lag} must be >= 0")
    if max_lag >= t_len:
        raise DataError(f"max_lag={max_lag} requires more than {max_lag} cycles, "
                        f"panel has {t_len}")
    xi = panel.values[i] - panel.values[i].mean()
    xj = panel.values[j] - panel.values[j].mean()
    var_i = float(np.mean(xi * xi))
    var_j = float(np.mean(xj * xj))
    if var_i == 0.0 or var_j == 0.0:
        raise DegenerateSeriesError(
            f"component {i if var_i == 0.0 else j} has zero variance")
    # For i == j divide by the variance itself so the lag-0 value is exactly 1.
    denom = var_i if i == j else float(np.sqrt(var_i * var_j))
    lags = np.arange(max_lag + 1)
    corr = np.empty(max_lag + 1)
    for lag in lags:
        if lag == 0:
            cov = float(np.mean(xi * xj))
        else:
            cov = float(np.sum(xi[lag:] * xj[:-lag])) / t_len
        corr[lag] = cov / denom
    np.clip(corr, -1.0, 1.0, out=corr)
    return AcfTable(pair=(i, j), lags=lags, correlations=corr)
