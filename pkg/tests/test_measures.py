import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from groupineq.distributions import RefDistribution
from groupineq.errors import DomainError
from groupineq.measures import (atkinson_hat, gini_hat, qri_hat, sample_qri,
                                sample_quantile_function, theil_hat)

positive = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False)
samples = st.lists(positive, min_size=2, max_size=40)


class TestGini:
    def test_equality(self):
        assert gini_hat([4.0] * 7) == 0.0

    def test_hand_value(self):
        assert gini_hat([1, 2, 3]) == pytest.approx(2 / 9, abs=1e-15)

    def test_order_irrelevant(self):
        assert gini_hat([3, 1, 2]) == gini_hat([1, 2, 3])

    def test_rows_are_samples(self):
        x = np.array([[1, 2, 3], [5, 5, 5]], dtype=float)
        np.testing.assert_allclose(gini_hat(x), [2 / 9, 0.0])

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            gini_hat([1.0, 0.0, 2.0])


class TestTheil:
    def test_equality(self):
        assert theil_hat([2.5] * 4) == 0.0

    def test_hand_value(self):
        expected = (0.5 * math.log(0.5) + 1.5 * math.log(1.5)) / 3
        assert theil_hat([1, 2, 3]) == pytest.approx(expected, abs=1e-15)
        assert theil_hat([1, 2, 3]) == pytest.approx(0.08721, abs=1e-5)

    def test_single_holder_limit_approaches_log_n(self):
        n = 50
        x = np.full(n, 1e-12)
        x[-1] = 1.0
        assert theil_hat(x) == pytest.approx(math.log(n), rel=1e-9)


class TestAtkinson:
    def test_equality(self):
        for eps in (0.5, 1.0, 2.0):
            assert atkinson_hat([3.0] * 5, eps) == pytest.approx(0.0, abs=1e-15)

    def test_power_mean_branch(self):
        expected = 1 - np.mean(np.sqrt([1, 2, 3])) ** 2 / 2
        assert atkinson_hat([1, 2, 3], 0.5) == pytest.approx(expected, abs=1e-15)
        assert atkinson_hat([1, 2, 3], 0.5) == pytest.approx(0.04491, abs=1e-5)

    def test_geometric_branch(self):
        assert atkinson_hat([1, 2, 3], 1.0) == pytest.approx(1 - 6 ** (1 / 3) / 2, abs=1e-15)

    def test_default_epsilon_is_half(self):
        assert atkinson_hat([1, 2, 3]) == atkinson_hat([1, 2, 3], 0.5)

    @pytest.mark.parametrize("eps", [0.0, -1.0])
    def test_rejects_nonpositive_epsilon(self, eps):
        with pytest.raises(DomainError):
            atkinson_hat([1, 2, 3], eps)


class TestQri:
    def test_constant_quantile(self):
        assert qri_hat(lambda p: np.full_like(p, 7.0)) == 0.0

    def test_exponential_population(self):
        # Table 1: I = 0.702
        d = RefDistribution("exponential", (1.0,))
        assert qri_hat(d.quantile, 100) == pytest.approx(0.702, abs=1e-3)

    def test_lognormal_population(self):
        d = RefDistribution("lognormal", (0.0, 1.0))
        assert qri_hat(d.quantile, 100) == pytest.approx(0.664, abs=1e-3)

    def test_sample_evaluator_matches_sample_qri(self):
        x = np.random.default_rng(1).exponential(size=101) + 0.01
        assert qri_hat(sample_quantile_function(x)) == pytest.approx(sample_qri(x), abs=1e-15)

    def test_rejects_nonpositive_quantile(self):
        with pytest.raises(DomainError):
            qri_hat(lambda p: p - 0.5)

    @pytest.mark.parametrize("family,params", [
        ("lognormal", (0, 1)), ("singhmaddala", (1.6971, 87.6981, 8.3679)),
        ("dagum", (4.273, 14.28, 0.36)), ("chisquare", (2,)), ("paretoii", (1, 2)),
        ("exponential", (1,)), ("weibull", (10,))])
    def test_grid_of_100_is_enough(self, family, params):
        d = RefDistribution(family, params)
        assert abs(qri_hat(d.quantile, 100) - qri_hat(d.quantile, 100_000)) < 1e-3


ESTIMATORS = [gini_hat, theil_hat, atkinson_hat, sample_qri]


class TestInvariances:
    @pytest.mark.parametrize("est", ESTIMATORS)
    @pytest.mark.parametrize("c", [1e-3, 1.0, 1e6])
    def test_scale_invariance(self, est, c):
        x = np.random.default_rng(7).lognormal(size=200)
        assert est(c * x) == pytest.approx(est(x), rel=1e-12, abs=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(samples, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, x, rnd):
        y = list(x)
        rnd.shuffle(y)
        for est in (gini_hat, theil_hat, atkinson_hat):
            assert est(y) == pytest.approx(est(x), rel=1e-12, abs=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(samples)
    def test_ranges(self, x):
        n = len(x)
        assert 0 <= gini_hat(x) <= (n - 1) / n + 1e-12
        assert 0 <= theil_hat(x) <= math.log(n) + 1e-12
        assert 0 <= atkinson_hat(x) < 1

    def test_regressive_transfer_never_decreases_gini_or_theil(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            x = np.sort(rng.lognormal(size=10))
            t = rng.uniform(0, x[0] * 0.999)
            y = x.copy()
            y[0] -= t
            y[-1] += t
            assert gini_hat(y) >= gini_hat(x) - 1e-15
            assert theil_hat(y) >= theil_hat(x) - 1e-15
