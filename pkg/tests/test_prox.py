"""Proximal operators checked against hand values and a numeric oracle.

The oracle in conftest minimizes 0.5*||u - v||^2 + threshold * penalty(u)
directly with Nelder-Mead, so agreement here means the closed forms really
are the minimizers, not just self-consistent code.
"""

import numpy as np
import pytest

from cyclecast import DataError
from cyclecast.prox import (
    PENALTY_FAMILIES,
    apply_prox,
    hglasso_penalty,
    hglasso_prox,
    lasso_penalty,
    lasso_prox,
    penalty_value,
)

from conftest import brute_force_prox


class TestSoftThreshold:
    def test_shrinks_above_threshold(self):
        assert lasso_prox(np.array([3.0]), 1.0)[0] == 2.0

    def test_zeroes_below_threshold(self):
        assert lasso_prox(np.array([0.5]), 1.0)[0] == 0.0

    def test_identity_at_zero_threshold(self):
        assert lasso_prox(np.array([-3.0]), 0.0)[0] == -3.0

    def test_sign_preserved(self):
        out = lasso_prox(np.array([-3.0, 3.0, -0.2, 0.2]), 1.0)
        np.testing.assert_allclose(out, [-2.0, 2.0, 0.0, 0.0])

    def test_never_grows_magnitude(self, rng):
        x = rng.normal(0.0, 2.0, size=50)
        out = lasso_prox(x, 0.7)
        assert np.all(np.abs(out) <= np.abs(x) + 1e-15)


class TestNestedGroupProx:
    def test_single_lag_matches_soft_threshold(self, rng):
        # With one lag each source column is a lone scalar, so the group
        # norm degenerates to an absolute value.
        for _ in range(20):
            x = rng.normal(0.0, 1.5, size=6)
            tau = rng.uniform(0.0, 1.2)
            np.testing.assert_allclose(hglasso_prox(x, tau, 1),
                                       lasso_prox(x, tau), atol=1e-14)

    def test_two_lag_cascade_by_hand(self):
        # k=1, p=2, column (0.3, 0.1), threshold 0.2: the lag-2 scalar dies
        # first (0.1 < 0.2), then the surviving suffix (0.3, 0) shrinks by
        # 1 - 0.2/0.3.
        out = hglasso_prox(np.array([0.3, 0.1]), 0.2, 2)
        np.testing.assert_allclose(out, [0.1, 0.0], atol=1e-15)

    def test_higher_lag_dies_first(self):
        out = hglasso_prox(np.array([0.3, 0.1]), 0.2, 2)
        assert out[1] == 0.0
        assert out[0] > 0.0

    def test_huge_threshold_zeroes_everything(self, rng):
        x = rng.normal(0.0, 1.0, size=12)
        out = hglasso_prox(x, 1e6, 3)
        np.testing.assert_array_equal(out, np.zeros(12))

    def test_zero_threshold_is_identity(self, rng):
        x = rng.normal(0.0, 1.0, size=8)
        np.testing.assert_array_equal(hglasso_prox(x, 0.0, 2), x)

    def test_lag_support_is_prefix_per_source(self, rng):
        # If a source's lag-l coefficient is zeroed, every later lag of the
        # same source must be zero too.
        for _ in range(50):
            k = int(rng.integers(1, 4))
            p = int(rng.integers(1, 4))
            x = rng.normal(0.0, 1.0, size=k * p)
            tau = rng.uniform(0.0, 1.5)
            w = hglasso_prox(x, tau, p).reshape(p, k)
            for j in range(k):
                seen_zero = False
                for lag in range(p):
                    if w[lag, j] == 0.0:
                        seen_zero = True
                    elif seen_zero:
                        pytest.fail(
                            f"source {j}: lag {lag + 1} nonzero after a zero")

    def test_indivisible_length_rejected(self):
        with pytest.raises(DataError):
            hglasso_prox(np.ones(5), 0.1, 2)


class TestOracleEquivalence:
    """Closed forms must agree with direct numeric minimization."""

    @pytest.mark.parametrize("size,tau", [(2, 0.3), (4, 0.8), (6, 0.1)])
    def test_lasso_matches_oracle(self, size, tau, rng):
        x = rng.normal(0.0, 1.0, size=size)
        oracle = brute_force_prox(x, tau, "lasso")
        np.testing.assert_allclose(lasso_prox(x, tau), oracle, atol=1e-4)

    @pytest.mark.parametrize("k,p,tau", [(1, 2, 0.25), (2, 2, 0.5), (2, 3, 0.15)])
    def test_hglasso_matches_oracle(self, k, p, tau, rng):
        x = rng.normal(0.0, 1.0, size=k * p)
        oracle = brute_force_prox(x, tau, "hglasso", n_lags=p)
        np.testing.assert_allclose(hglasso_prox(x, tau, p), oracle, atol=1e-4)


class TestPenaltyValues:
    def test_lasso_penalty_is_l1(self):
        assert lasso_penalty(np.array([1.0, -2.0, 0.5])) == 3.5

    def test_hglasso_penalty_sums_suffix_norms(self):
        # k=1, p=2, x=(3, 4): suffixes are (3, 4) and (4,), so the penalty
        # is 5 + 4.
        assert hglasso_penalty(np.array([3.0, 4.0]), 2) == pytest.approx(9.0)

    def test_none_family_is_zero(self, rng):
        assert penalty_value("none", rng.normal(size=6), 2) == 0.0

    def test_unknown_family_rejected(self):
        with pytest.raises(DataError):
            penalty_value("ridge", np.ones(4), 2)
        with pytest.raises(DataError):
            apply_prox("ridge", np.ones(4), 0.1, 2)

    def test_family_listing(self):
        assert PENALTY_FAMILIES == ("none", "lasso", "hglasso")
