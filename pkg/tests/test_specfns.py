import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from tnfit.specfns import (
    beta_median,
    beta_median_vec,
    normal_interval_mass,
    reg_inc_beta,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_pdf_deriv,
    std_normal_quantile,
)


def mp_pdf(x):
    return float(mpmath.exp(-mpmath.mpf(x) ** 2 / 2) / mpmath.sqrt(2 * mpmath.pi))


class TestStdNormalPdf:
    def test_at_zero(self):
        assert std_normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-15)

    def test_extended_precision_oracle(self):
        mpmath.mp.dps = 40
        for x in [0.25, 1.0, 2.5, -3.7, 6.0]:
            assert std_normal_pdf(x) == pytest.approx(mp_pdf(x), rel=1e-15)

    @given(st.floats(-30, 30))
    def test_symmetry(self, x):
        assert std_normal_pdf(x) == std_normal_pdf(-x)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            std_normal_pdf(float("inf"))
        with pytest.raises(ValueError):
            std_normal_pdf(float("nan"))


class TestPdfDerivatives:
    def test_trivial_values(self):
        phi0 = std_normal_pdf(0.0)
        assert std_normal_pdf_deriv(0.0, 1) == 0.0
        assert std_normal_pdf_deriv(0.0, 2) == pytest.approx(-phi0, abs=1e-16)
        assert std_normal_pdf_deriv(0.0, 3) == 0.0

    def test_order3_at_one_matches_finite_differences(self):
        # Richardson-extrapolated central differences of phi'' at 1
        h = 1e-4
        d = lambda hh: (std_normal_pdf_deriv(1 + hh, 2) - std_normal_pdf_deriv(1 - hh, 2)) / (2 * hh)
        richardson = (4 * d(h / 2) - d(h)) / 3
        assert std_normal_pdf_deriv(1.0, 3) == pytest.approx(richardson, abs=1e-10)
        assert std_normal_pdf_deriv(1.0, 3) == pytest.approx(2 * std_normal_pdf(1.0), rel=1e-14)

    def test_each_order_is_derivative_of_previous(self):
        h = 1e-5
        xs = np.linspace(-4, 4, 33)
        for order in (1, 2, 3):
            f = std_normal_pdf if order == 1 else (lambda x, o=order - 1: std_normal_pdf_deriv(x, o))
            fd = (np.array([f(x + h) for x in xs]) - np.array([f(x - h) for x in xs])) / (2 * h)
            exact = np.array([std_normal_pdf_deriv(x, order) for x in xs])
            scale = np.maximum(np.abs(exact), 1e-3)
            assert np.max(np.abs(fd - exact) / scale) < 1e-6

    def test_rejects_bad_order(self):
        for order in (0, 4, -1):
            with pytest.raises(ValueError):
                std_normal_pdf_deriv(1.0, order)


class TestStdNormalCdf:
    def test_at_zero(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_quadrature_oracle_at_one(self):
        tail, _ = integrate.quad(std_normal_pdf, 0, 1, epsabs=1e-14, epsrel=1e-14)
        assert std_normal_cdf(1.0) == pytest.approx(0.5 + tail, abs=1e-12)
        assert std_normal_cdf(-1.0) == pytest.approx(0.5 - tail, abs=1e-12)

    def test_infinities(self):
        assert std_normal_cdf(float("-inf")) == 0.0
        assert std_normal_cdf(float("inf")) == 1.0

    @given(st.floats(-8, 8))
    def test_complement_symmetry(self, x):
        assert std_normal_cdf(-x) == pytest.approx(1 - std_normal_cdf(x), abs=1e-15)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            std_normal_cdf(float("nan"))


class TestStdNormalQuantile:
    def test_median(self):
        assert std_normal_quantile(0.5) == 0.0

    def test_round_trip_with_cdf(self):
        assert std_normal_quantile(std_normal_cdf(1.0)) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=200)
    @given(st.floats(1e-10, 1 - 1e-10))
    def test_round_trip_property(self, p):
        assert std_normal_cdf(std_normal_quantile(p)) == pytest.approx(p, abs=1e-12)

    @given(st.floats(1e-4, 0.5))
    def test_antisymmetry(self, p):
        # 1 - p must stay exact in fp for the identity to hold at 1e-12
        assert std_normal_quantile(p) == pytest.approx(-std_normal_quantile(1 - p), abs=1e-12)

    def test_domain_errors(self):
        for p in (0.0, 1.0):
            with pytest.raises(ValueError, match="infinite"):
                std_normal_quantile(p)
        for p in (-0.2, 1.3, float("nan")):
            with pytest.raises(ValueError):
                std_normal_quantile(p)


class TestIntervalMass:
    def test_matches_cdf_difference(self):
        for lo, hi in [(-1, 1), (-3, -1), (1, 3), (-2, 0.5)]:
            assert normal_interval_mass(lo, hi) == pytest.approx(
                std_normal_cdf(hi) - std_normal_cdf(lo), abs=1e-15
            )

    def test_right_tail_avoids_cancellation(self):
        mpmath.mp.dps = 40
        exact = float(mpmath.ncdf(7) - mpmath.ncdf(5))
        assert normal_interval_mass(5.0, 7.0) == pytest.approx(exact, rel=1e-13)


def beta_pdf(t, a, b):
    return t ** (a - 1) * (1 - t) ** (b - 1) / math.exp(
        math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    )


class TestRegIncBeta:
    def test_uniform_case(self):
        assert reg_inc_beta(1.0, 1.0, 0.3) == pytest.approx(0.3, abs=1e-15)

    @given(st.floats(0.01, 0.99))
    def test_closed_form_a1_b2(self, x):
        assert reg_inc_beta(1.0, 2.0, x) == pytest.approx(1 - (1 - x) ** 2, abs=1e-14)

    def test_quadrature_oracle(self):
        val, _ = integrate.quad(beta_pdf, 0, 0.4, args=(2.5, 3.7), epsabs=1e-14, epsrel=1e-14)
        assert reg_inc_beta(2.5, 3.7, 0.4) == pytest.approx(val, abs=1e-12)

    def test_endpoints(self):
        assert reg_inc_beta(2.0, 3.0, 0.0) == 0.0
        assert reg_inc_beta(2.0, 3.0, 1.0) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.2, 40), st.floats(0.2, 40), st.floats(0.0, 1.0))
    def test_reflection_identity(self, a, b, x):
        assert reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1 - x) == pytest.approx(1.0, abs=1e-13)

    def test_monotone_in_x(self):
        xs = np.linspace(0, 1, 101)
        vals = reg_inc_beta(3.2, 1.7, xs)
        assert (np.diff(vals) >= 0).all()

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            reg_inc_beta(0.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            reg_inc_beta(1.0, -2.0, 0.5)
        with pytest.raises(ValueError):
            reg_inc_beta(1.0, 1.0, 1.5)


def bisect_median(a, b, tol=1e-13):
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if reg_inc_beta(a, b, mid) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestBetaMedian:
    def test_symmetric_cases(self):
        assert beta_median(3.0, 3.0) == pytest.approx(0.5, abs=1e-13)
        assert beta_median(1.0, 1.0) == pytest.approx(0.5, abs=1e-13)

    def test_closed_form_1_2(self):
        assert beta_median(1.0, 2.0) == pytest.approx(1 - 2 ** -0.5, abs=1e-13)

    def test_bisection_oracle_2_5(self):
        assert beta_median(2.0, 5.0) == pytest.approx(bisect_median(2.0, 5.0), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.3, 60), st.floats(0.3, 60))
    def test_defining_equation_and_range(self, a, b):
        m = beta_median(a, b)
        assert 0.0 < m < 1.0
        assert reg_inc_beta(a, b, m) == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.3, 60), st.floats(0.3, 60))
    def test_symmetry(self, a, b):
        assert beta_median(a, b) == pytest.approx(1 - beta_median(b, a), abs=1e-13)

    def test_vectorized_matches_scalar(self):
        a = np.array([1.0, 2.5, 17.0, 300.0])
        b = np.array([4.0, 2.5, 1.3, 260.0])
        vec = beta_median_vec(a, b)
        for i in range(a.size):
            assert vec[i] == beta_median(a[i], b[i])

    def test_warm_start_agrees_with_cold(self):
        a = np.linspace(2, 40, 25)
        b = np.linspace(30, 3, 25)
        cold = beta_median_vec(a, b)
        warm = beta_median_vec(a, b, x0=cold + 1e-4)
        assert np.max(np.abs(warm - cold)) < 1e-12

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            beta_median(0.0, 2.0)
        with pytest.raises(ValueError):
            beta_median(2.0, float("inf"))
