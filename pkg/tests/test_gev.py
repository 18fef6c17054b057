"""Distribution-family tests: frozen closed-form oracles, quadrature and
finite-difference checks, branch continuity through shape -> 0."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import genextreme

from rainmax.gev import (
    GevParams,
    ReturnSpec,
    gev_cdf,
    gev_pdf,
    gev_quantile,
    gev_sample,
    log_likelihood,
    return_level,
)

GUMBEL01 = GevParams(0.0, 1.0, 0.0)


class TestParams:
    def test_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            GevParams(0.0, 0.0, 0.1)
        with pytest.raises(ValueError):
            GevParams(0.0, -1.0, 0.1)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            GevParams(math.nan, 1.0, 0.0)
        with pytest.raises(ValueError):
            GevParams(0.0, 1.0, math.inf)

    def test_family_classification(self):
        assert GevParams(0, 1, 0.2).family == "frechet"
        assert GevParams(0, 1, -0.2).family == "weibull"
        assert GevParams(0, 1, 0.0).family == "gumbel"

    def test_support_endpoints(self):
        lo, hi = GevParams(0, 1, 0.5).support()
        assert lo == pytest.approx(-2.0) and hi == math.inf
        lo, hi = GevParams(0, 1, -0.5).support()
        assert lo == -math.inf and hi == pytest.approx(2.0)
        assert GUMBEL01.support() == (-math.inf, math.inf)


class TestReturnSpec:
    def test_period_prob_consistency(self):
        spec = ReturnSpec.from_period(10.0)
        assert spec.exceedance_prob == pytest.approx(0.1)
        with pytest.raises(ValueError):
            ReturnSpec(period_years=10.0, exceedance_prob=0.2)

    def test_period_must_exceed_one(self):
        with pytest.raises(ValueError):
            ReturnSpec.from_prob(1.5)


class TestCdf:
    def test_gumbel_at_zero(self):
        assert gev_cdf(0.0, GUMBEL01) == pytest.approx(math.exp(-1.0), abs=1e-14)

    def test_below_finite_lower_endpoint(self):
        assert gev_cdf(-2.0, GevParams(0, 1, 0.5)) == 0.0
        assert gev_cdf(-2.5, GevParams(0, 1, 0.5)) == 0.0

    def test_above_finite_upper_endpoint(self):
        assert gev_cdf(2.5, GevParams(0, 1, -0.5)) == 1.0

    def test_limit_continuity_at_zero_shape(self):
        for x in (-1.0, 0.3, 1.0, 4.0):
            near = gev_cdf(x, GevParams(0, 1, 1e-9))
            exact = gev_cdf(x, GUMBEL01)
            assert near == pytest.approx(exact, abs=1e-6)

    def test_matches_scipy_genextreme(self):
        # scipy's shape convention is the negative of ours
        for xi in (-0.4, -0.1, 0.1, 0.4):
            params = GevParams(1.5, 2.0, xi)
            x = np.linspace(-4, 20, 50)
            mine = gev_cdf(x, params)
            ref = genextreme.cdf(x, -xi, loc=1.5, scale=2.0)
            np.testing.assert_allclose(mine, ref, atol=1e-12)


class TestPdf:
    def test_integrates_to_one_gumbel(self):
        total, err = quad(lambda x: gev_pdf(x, GUMBEL01), -10, 40, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_integrates_to_one_finite_support(self):
        params = GevParams(0, 1, -0.3)
        lo, hi = params.support()
        total, _ = quad(lambda x: gev_pdf(x, params), -15, hi, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_zero_outside_support(self):
        assert gev_pdf(-2.1, GevParams(0, 1, 0.5)) == 0.0
        assert gev_pdf(2.1, GevParams(0, 1, -0.5)) == 0.0

    @pytest.mark.parametrize("xi", [-0.3, 0.0, 0.2, 0.3])
    def test_matches_cdf_derivative(self, xi):
        params = GevParams(0.0, 1.0, xi)
        h = 1e-6
        for x in (0.7, 0.0, 1.5):
            fd = (gev_cdf(x + h, params) - gev_cdf(x - h, params)) / (2 * h)
            assert gev_pdf(x, params) == pytest.approx(fd, abs=1e-5)

    def test_limit_continuity_at_zero_shape(self):
        for x in (-1.0, 0.7, 2.0):
            assert gev_pdf(x, GevParams(0, 1, 1e-8)) == pytest.approx(
                gev_pdf(x, GUMBEL01), abs=1e-6
            )


class TestQuantile:
    def test_gumbel_median(self):
        assert gev_quantile(0.5, GUMBEL01) == pytest.approx(-math.log(math.log(2.0)), abs=1e-14)

    def test_frechet_upper_quantile(self):
        # closed form: 2 * ((-ln 0.9)^{-1/2} - 1)
        expected = 2.0 * ((-math.log(0.9)) ** -0.5 - 1.0)
        got = gev_quantile(0.9, GevParams(0, 1, 0.5))
        assert got == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(4.1616, abs=5e-5)
        # independent route: bisection on the CDF
        root = brentq(lambda x: gev_cdf(x, GevParams(0, 1, 0.5)) - 0.9, -1.9, 100.0, xtol=1e-12)
        assert got == pytest.approx(root, abs=1e-9)

    def test_inverse_of_cdf_example(self):
        assert gev_quantile(math.exp(-1.0), GUMBEL01) == pytest.approx(0.0, abs=1e-12)

    def test_domain_errors(self):
        for p in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                gev_quantile(p, GUMBEL01)

    @pytest.mark.parametrize("xi", [-0.3, -0.05, 0.0, 0.05, 0.3])
    def test_roundtrip_with_cdf(self, xi):
        params = GevParams(3.0, 2.5, xi)
        p = np.arange(0.01, 1.0, 0.01)
        back = gev_cdf(gev_quantile(p, params), params)
        np.testing.assert_allclose(back, p, atol=1e-10)

    def test_limit_continuity_at_zero_shape(self):
        p = np.array([0.05, 0.5, 0.95])
        near = gev_quantile(p, GevParams(0, 1, -1e-8))
        exact = gev_quantile(p, GUMBEL01)
        np.testing.assert_allclose(near, exact, atol=1e-6)

    @settings(max_examples=50, deadline=None)
    @given(
        p=st.floats(0.01, 0.99),
        mu=st.floats(-50, 150),
        sigma=st.floats(0.1, 60),
        xi=st.floats(-0.45, 0.45),
    )
    def test_location_scale_equivariance(self, p, mu, sigma, xi):
        standard = gev_quantile(p, GevParams(0.0, 1.0, xi))
        shifted = gev_quantile(p, GevParams(mu, sigma, xi))
        assert shifted == pytest.approx(mu + sigma * standard, rel=1e-9, abs=1e-9)


class TestReturnLevel:
    def test_ten_year_level_from_reference_row(self):
        params = GevParams(70.25, 22.30, 0.0)
        expected = 70.25 + 22.30 * (-math.log(-math.log(0.9)))
        got = return_level(ReturnSpec.from_period(10.0), params)
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(120.4332, abs=1e-3)

    def test_strictly_increasing_in_period(self):
        params = GevParams(80, 25, 0.1)
        levels = [return_level(ReturnSpec.from_period(t), params) for t in (2, 5, 10, 50, 100)]
        assert all(a < b for a, b in zip(levels, levels[1:]))

    def test_inverts_cdf_at_mode_probability(self):
        t = 1.0 / (1.0 - math.exp(-1.0))
        assert return_level(ReturnSpec.from_period(t), GUMBEL01) == pytest.approx(0.0, abs=1e-12)


class TestSample:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            gev_sample(GUMBEL01, 0, seed=1)

    def test_deterministic(self):
        a = gev_sample(GevParams(80, 25, 0.1), 100, seed=7)
        b = gev_sample(GevParams(80, 25, 0.1), 100, seed=7)
        np.testing.assert_array_equal(a, b)

    def test_gumbel_mean_near_euler_gamma(self):
        x = gev_sample(GUMBEL01, 100_000, seed=3)
        assert x.mean() == pytest.approx(np.euler_gamma, abs=0.02)

    def test_limit_continuity_at_zero_shape(self):
        near = gev_sample(GevParams(0, 1, 1e-8), 200, seed=5)
        exact = gev_sample(GUMBEL01, 200, seed=5)
        np.testing.assert_allclose(near, exact, atol=1e-6)


class TestLogLikelihood:
    def test_single_point_at_gumbel_mode(self):
        assert log_likelihood(GUMBEL01, [0.0]) == pytest.approx(-1.0, abs=1e-12)

    def test_out_of_support_sentinel(self):
        assert log_likelihood(GevParams(0, 1, 0.5), [-3.0, 1.0]) == -math.inf

    def test_additive_over_points(self):
        params = GevParams(1.0, 2.0, 0.2)
        pts = [0.5, 2.0, 7.0]
        total = log_likelihood(params, pts)
        assert total == pytest.approx(sum(log_likelihood(params, [p]) for p in pts), abs=1e-10)

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError):
            log_likelihood(GUMBEL01, [])

    def test_limit_continuity_at_zero_shape(self):
        data = gev_sample(GevParams(5, 2, 0.0), 50, seed=11)
        near = log_likelihood(GevParams(5, 2, 1e-8), data)
        exact = log_likelihood(GevParams(5, 2, 0.0), data)
        assert near == pytest.approx(exact, abs=1e-6)
