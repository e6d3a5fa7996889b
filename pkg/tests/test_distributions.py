import math

import numpy as np
import pytest

from groupineq.distributions import (FAMILIES, RefDistribution, measures_from_quantile,
                                     ref_density, ref_quantile, true_measures)
from groupineq.errors import DomainError

ALL = [RefDistribution.from_spec(f) for f in FAMILIES]


class TestQuantile:
    def test_exponential_median(self):
        assert ref_quantile(RefDistribution("exponential", (1,)), 0.5) == pytest.approx(
            math.log(2), abs=1e-15)

    def test_chisquare_two_median(self):
        assert ref_quantile(RefDistribution("chisquare", (2,)), 0.5) == pytest.approx(
            2 * math.log(2), abs=1e-12)

    def test_pareto_by_hand(self):
        # invert 1 - (1 + x)^-2 = 0.75
        assert ref_quantile(RefDistribution("paretoii", (1, 2)), 0.75) == pytest.approx(
            1.0, abs=1e-14)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            ref_quantile(ALL[0], p)

    @pytest.mark.parametrize("d", ALL, ids=str)
    def test_increasing_and_nonnegative(self, d):
        q = d.quantile(np.linspace(1e-6, 1 - 1e-6, 2001))
        assert np.all(np.diff(q) > 0)
        assert np.all(q >= 0)

    @pytest.mark.parametrize("d", ALL, ids=str)
    def test_cdf_inverts_quantile(self, d):
        p = np.linspace(0.01, 0.99, 99)
        np.testing.assert_allclose(d.cdf(d.quantile(p)), p, atol=1e-10)

    def test_lognormal_against_erf(self):
        # independent: bisection on the erf-based normal CDF
        d = RefDistribution("lognormal", (0.3, 0.8))
        for p in (0.001, 0.2, 0.5, 0.97):
            lo, hi = -10.0, 10.0
            for _ in range(200):
                mid = (lo + hi) / 2
                if 0.5 * (1 + math.erf(mid / math.sqrt(2))) < p:
                    lo = mid
                else:
                    hi = mid
            assert d.quantile(p) == pytest.approx(math.exp(0.3 + 0.8 * lo), rel=1e-9)


class TestDensity:
    def test_exponential(self):
        d = RefDistribution("exponential", (1,))
        assert ref_density(d, 0.0) == 1.0
        assert ref_density(d, math.log(2)) == pytest.approx(0.5, abs=1e-15)

    def test_pareto_by_hand(self):
        assert ref_density(RefDistribution("paretoii", (1, 2)), 1.0) == pytest.approx(0.25)

    def test_outside_support_is_zero(self):
        for d in ALL:
            assert ref_density(d, -1.0) == 0.0

    @pytest.mark.parametrize("d", ALL, ids=str)
    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    def test_density_times_quantile_derivative_is_one(self, d, p):
        h = 1e-6
        dq = (d.quantile(p + h) - d.quantile(p - h)) / (2 * h)
        assert ref_density(d, d.quantile(p)) * dq == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("d", ALL, ids=str)
    def test_integrates_to_one(self, d):
        from scipy import integrate
        total = integrate.quad(d.pdf, 0, np.inf, limit=500)[0]
        assert total == pytest.approx(1.0, abs=1e-6)


TABLE1 = {
    "lognormal": (0.520, 0.500, 0.221, 0.664),
    "singhmaddala": (0.355, 0.206, 0.106, 0.579),
    "dagum": (0.335, 0.191, 0.097, 0.548),
    "chisquare": (0.500, 0.423, 0.215, 0.702),
    "paretoii": (0.667, 1.000, 0.383, 0.740),
    "exponential": (0.500, 0.423, 0.215, 0.702),
    "weibull": (0.067, 0.007, 0.004, 0.167),
}


class TestTrueMeasures:
    @pytest.mark.parametrize("family", ["exponential", "lognormal", "weibull"])
    def test_table1_rows(self, family):
        t = true_measures(RefDistribution.from_spec(family))
        for got, want in zip(t.as_dict().values(), TABLE1[family]):
            assert got == pytest.approx(want, abs=1e-3)

    def test_exponential_closed_forms(self):
        # Gini 1/2; Theil 1 - Euler gamma; Atkinson(0.5) 1 - Gamma(3/2)^2 = 1 - pi/4
        t = true_measures(RefDistribution("exponential", (1,)))
        assert t.gini == pytest.approx(0.5, abs=1e-7)
        assert t.theil == pytest.approx(1 - np.euler_gamma, abs=1e-6)
        assert t.atkinson == pytest.approx(1 - math.pi / 4, abs=1e-7)

    def test_weibull_gini_closed_form(self):
        t = true_measures(RefDistribution("weibull", (10,)))
        assert t.gini == pytest.approx(1 - 2 ** -0.1, abs=1e-7)

    def test_chisquare_equals_exponential(self):
        a = true_measures(RefDistribution("chisquare", (2,)))
        b = true_measures(RefDistribution("exponential", (1,)))
        for x, y in zip(a.as_dict().values(), b.as_dict().values()):
            assert round(x, 3) == round(y, 3)

    @pytest.mark.parametrize("d", ALL, ids=str)
    def test_scale_invariance(self, d):
        base = measures_from_quantile(d.quantile)
        scaled = measures_from_quantile(lambda p: 37.5 * d.quantile(p))
        for x, y in zip(base.as_dict().values(), scaled.as_dict().values()):
            assert x == pytest.approx(y, abs=1e-9)

    @pytest.mark.parametrize("d", ALL, ids=str)
    def test_ranges(self, d):
        t = true_measures(d)
        assert 0 <= t.gini <= 1 and t.theil >= 0
        assert 0 <= t.atkinson <= 1 and 0 <= t.qri <= 1


class TestSpec:
    def test_round_trip(self):
        d = RefDistribution.from_spec("singhmaddala:1.6971,87.6981,8.3679")
        assert RefDistribution.from_spec(d.to_spec()) == d

    def test_defaults(self):
        assert RefDistribution.from_spec("dagum").params == (4.273, 14.28, 0.36)
        assert RefDistribution.from_spec("weibull:10").params == (10.0, 1.0)

    @pytest.mark.parametrize("spec", ["gamma:1", "exponential:-1", "paretoii:1",
                                      "lognormal:a,b"])
    def test_rejects(self, spec):
        with pytest.raises(DomainError):
            RefDistribution.from_spec(spec)
