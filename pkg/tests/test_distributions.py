import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from pccompare import distributions as d
from pccompare.errors import DomainError

# Frozen oracle values (scipy.integrate.quad of the densities, cross-checked with mpmath).
LNGAMMA_7_3 = 7.147892523022249
IBETA_25_35_04 = 0.4869041915261175
PGAMMA_42_30 = 0.3137074857845145
T_CDF_2_10 = 0.9633059826146302
F_CDF_31_4_17 = 0.9564281414587118
CHISQ_CDF_55_3 = 0.8613613826175857


def _gamma_quad(s: float) -> float:
    # substitute t = u**(1/s) to remove the singularity at 0
    return quad(lambda u: math.exp(-(u ** (1.0 / s))), 0, math.inf, epsabs=1e-15, epsrel=1e-15, limit=200)[0] / s


def t_pdf(x, df):
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)
    return c * (1 + x * x / df) ** (-(df + 1) / 2)


def f_pdf(x, a, b):
    if x == 0:
        return 0.0 if a > 2 else math.inf
    lg = math.lgamma(a / 2) + math.lgamma(b / 2) - math.lgamma((a + b) / 2)
    return math.exp(0.5 * a * math.log(a) + 0.5 * b * math.log(b) + (a / 2 - 1) * math.log(x)
                    - (a + b) / 2 * math.log(b + a * x) - lg)


def chisq_pdf(x, k):
    return math.exp((k / 2 - 1) * math.log(x) - x / 2 - k / 2 * math.log(2) - math.lgamma(k / 2))


def normal_pdf(x):
    return math.exp(-x * x / 2) / math.sqrt(2 * math.pi)


class TestLnGamma:
    def test_trivial_values(self):
        assert d.ln_gamma(1.0) == 0.0
        assert d.ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), abs=1e-12)
        assert d.ln_gamma(0.5) == pytest.approx(0.5723649429, abs=1e-10)

    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    def test_product_form_oracle(self):
        assert d.ln_gamma(7.3) == pytest.approx(LNGAMMA_7_3, abs=1e-12)
        live = math.log(6.3 * 5.3 * 4.3 * 3.3 * 2.3 * 1.3 * 0.3 * _gamma_quad(0.3))
        assert d.ln_gamma(7.3) == pytest.approx(live, abs=1e-12)

    @pytest.mark.parametrize("x", [0.5, 0.75, 1.5, 2.0, 3.3, 7.3, 10.0, 19.5])
    def test_absolute_accuracy_moderate(self, x):
        assert abs(d.ln_gamma(x) - float(mp.loggamma(x))) <= 1e-12

    @pytest.mark.parametrize("x", [25.0, 100.0, 1234.5, 1e4, 1e5, 1e6])
    def test_relative_accuracy_large(self, x):
        ref = float(mp.loggamma(x))
        assert abs(d.ln_gamma(x) - ref) <= 1e-15 * abs(ref) + 1e-12

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.inf, math.nan])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            d.ln_gamma(x)


class TestIncompleteBeta:
    def test_boundaries(self):
        assert d.reg_inc_beta(2.0, 3.0, 0.0) == 0.0
        assert d.reg_inc_beta(2.0, 3.0, 1.0) == 1.0
        assert d.reg_inc_beta(1.0, 1.0, 0.37) == pytest.approx(0.37, rel=1e-14)

    def test_quadrature_oracle(self):
        assert d.reg_inc_beta(2.5, 3.5, 0.4) == pytest.approx(IBETA_25_35_04, rel=1e-10)

    @pytest.mark.parametrize("a,b,x", [(0.5, 0.5, 0.01), (0.5, 0.5, 0.99), (30, 2, 0.9), (2, 30, 0.1),
                                       (100, 120, 0.45), (5, 0.5, 0.999), (0.1, 10, 1e-5), (50, 50, 0.5)])
    def test_against_mpmath(self, a, b, x):
        ref = float(mp.betainc(a, b, 0, x, regularized=True))
        assert d.reg_inc_beta(a, b, x) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("args", [(0, 1, 0.5), (1, -1, 0.5), (1, 1, -0.1), (1, 1, 1.1)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            d.reg_inc_beta(*args)


class TestIncompleteGamma:
    def test_trivial(self):
        assert d.reg_inc_gamma_lower(3.0, 0.0) == 0.0
        for x in (0.1, 1.0, 4.0, 20.0):
            assert d.reg_inc_gamma_lower(1.0, x) == pytest.approx(-math.expm1(-x), rel=1e-12)

    def test_quadrature_oracle(self):
        assert d.reg_inc_gamma_lower(4.2, 3.0) == pytest.approx(PGAMMA_42_30, rel=1e-10)

    @pytest.mark.parametrize("s,x", [(0.5, 0.01), (0.5, 30.0), (4.2, 3.0), (10, 11.5), (100, 80), (100, 130),
                                     (2.5, 0.0001), (22.5, 59.2)])
    def test_against_mpmath(self, s, x):
        lo = float(mp.gammainc(s, 0, x, regularized=True))
        hi = float(mp.gammainc(s, x, mp.inf, regularized=True))
        assert d.reg_inc_gamma_lower(s, x) == pytest.approx(lo, rel=1e-10)
        assert d.reg_inc_gamma_upper(s, x) == pytest.approx(hi, rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            d.reg_inc_gamma_lower(0.0, 1.0)
        with pytest.raises(DomainError):
            d.reg_inc_gamma_lower(1.0, -1.0)


class TestNormal:
    def test_values(self):
        assert d.normal_cdf(0.0) == 0.5
        assert d.normal_cdf(1.959963985) == pytest.approx(0.975, abs=1e-9)
        for z in (-5.0, -1.3, 0.2, 2.7):
            assert d.normal_cdf(-z) == pytest.approx(1 - d.normal_cdf(z), abs=1e-15)

    def test_quadrature_root(self):
        live = 0.5 + quad(normal_pdf, 0, 1.959963985, epsabs=1e-15)[0]
        assert abs(live - 0.975) < 1e-9
        assert d.normal_cdf(1.959963985) == pytest.approx(live, abs=1e-12)

    @pytest.mark.parametrize("z", [-8.0, -3.1, -0.4, 0.0, 1.7, 6.0])
    def test_against_mpmath(self, z):
        assert abs(d.normal_cdf(z) - float(mp.ncdf(z))) <= 1e-12

    @pytest.mark.parametrize("p", [1e-300, 1e-20, 1e-5, 0.02425, 0.3, 0.5, 0.8, 0.975, 1 - 1e-12])
    def test_ppf_inverts_cdf(self, p):
        with mp.workdps(400):
            ref = float(mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1))
        assert d.normal_ppf(p) == pytest.approx(ref, rel=1e-13, abs=1e-15)

    def test_ppf_edges(self):
        assert d.normal_ppf(0.0) == -math.inf
        assert d.normal_ppf(1.0) == math.inf
        with pytest.raises(DomainError):
            d.normal_ppf(1.5)


class TestDerivedCdfs:
    def test_t(self):
        assert d.t_cdf(0.0, 7.0) == 0.5
        assert d.t_cdf(2.0, 10) == pytest.approx(T_CDF_2_10, abs=1e-12)
        for t in (-3.0, 0.4, 2.2):
            assert d.t_cdf(t, 4.5) + d.t_cdf(-t, 4.5) == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(DomainError):
            d.t_cdf(1.0, 0.0)

    def test_f(self):
        assert d.f_cdf(0.0, 3, 9) == 0.0
        assert d.f_cdf(3.1, 4, 17) == pytest.approx(F_CDF_31_4_17, abs=1e-12)
        with pytest.raises(DomainError):
            d.f_cdf(-1.0, 3, 9)
        with pytest.raises(DomainError):
            d.f_cdf(1.0, 0, 9)

    def test_chisq(self):
        assert d.chisq_cdf(0.0, 4) == 0.0
        assert d.chisq_cdf(5.5, 3) == pytest.approx(CHISQ_CDF_55_3, abs=1e-12)
        for x in (0.3, 2.0, 9.0):
            assert d.chisq_cdf(x, 2) == pytest.approx(-math.expm1(-x / 2), rel=1e-12)
        with pytest.raises(DomainError):
            d.chisq_cdf(-0.1, 2)

    @pytest.mark.parametrize("t", [-4.0, -1.0, 0.3, 2.5, 7.0])
    @pytest.mark.parametrize("df", [1.0, 3.0, 17.5, 200.0])
    def test_f_t_squared_identity(self, t, df):
        assert d.f_cdf(t * t, 1, df) == pytest.approx(2 * d.t_cdf(abs(t), df) - 1, abs=1e-10)

    def test_t_tends_to_normal(self):
        for z in np.linspace(-5, 5, 41):
            assert abs(d.t_cdf(z, 1e7) - d.normal_cdf(z)) <= 1e-6

    def test_survival_keeps_tiny_tails(self):
        assert d.chisq_sf(400.0, 3) == pytest.approx(float(mp.gammainc(1.5, 200, mp.inf, regularized=True)), rel=1e-9)
        ref = float(2 * mp.quad(lambda x: mp.gamma(5.5) / (mp.sqrt(10 * mp.pi) * mp.gamma(5)) * (1 + x * x / 10) ** -5.5,
                                [30, mp.inf]) / 2)
        assert d.t_sf(30.0, 10) == pytest.approx(ref, rel=1e-9)


finite = st.floats(allow_nan=False, allow_infinity=False)


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(-50, 50), b=st.floats(-50, 50), df=st.floats(0.1, 500))
    def test_t_monotone_and_bounded(self, a, b, df):
        lo, hi = sorted((a, b))
        p, q = d.t_cdf(lo, df), d.t_cdf(hi, df)
        assert 0.0 <= p <= q <= 1.0

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0, 200), b=st.floats(0, 200), df1=st.floats(0.2, 200), df2=st.floats(0.2, 200))
    def test_f_monotone_and_bounded(self, a, b, df1, df2):
        lo, hi = sorted((a, b))
        assert 0.0 <= d.f_cdf(lo, df1, df2) <= d.f_cdf(hi, df1, df2) <= 1.0

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0, 500), b=st.floats(0, 500), df=st.floats(0.1, 300))
    def test_chisq_monotone_and_bounded(self, a, b, df):
        lo, hi = sorted((a, b))
        assert 0.0 <= d.chisq_cdf(lo, df) <= d.chisq_cdf(hi, df) <= 1.0

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(-40, 40), b=st.floats(-40, 40))
    def test_normal_monotone_and_bounded(self, a, b):
        lo, hi = sorted((a, b))
        assert 0.0 <= d.normal_cdf(lo) <= d.normal_cdf(hi) <= 1.0

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0.05, 80), b=st.floats(0.05, 80), x=st.floats(0, 1), y=st.floats(0, 1))
    def test_beta_monotone_and_bounded(self, a, b, x, y):
        lo, hi = sorted((x, y))
        assert 0.0 <= d.reg_inc_beta(a, b, lo) <= d.reg_inc_beta(a, b, hi) <= 1.0

    @settings(max_examples=100, deadline=None)
    @given(t=st.floats(-30, 30), df=st.floats(0.5, 100))
    def test_cdf_plus_sf_is_one(self, t, df):
        assert d.t_cdf(t, df) + d.t_sf(t, df) == pytest.approx(1.0, abs=1e-14)


class TestQuadratureSweep:
    """Each CDF at 100 random points against direct numerical integration of its density."""

    N = 100

    def test_normal(self):
        rng = np.random.default_rng(1)
        for z in rng.uniform(-6, 6, self.N):
            live = 0.5 + math.copysign(quad(normal_pdf, 0, abs(z), epsabs=1e-14)[0], z)
            assert abs(d.normal_cdf(z) - live) <= 1e-8

    def test_t(self):
        rng = np.random.default_rng(2)
        for t, df in zip(rng.uniform(-8, 8, self.N), rng.uniform(1, 60, self.N)):
            live = 0.5 + math.copysign(quad(t_pdf, 0, abs(t), args=(df,), epsabs=1e-14)[0], t)
            assert abs(d.t_cdf(t, df) - live) <= 1e-8

    def test_f(self):
        rng = np.random.default_rng(3)
        for x, a, b in zip(rng.uniform(0, 8, self.N), rng.uniform(2, 30, self.N), rng.uniform(2, 60, self.N)):
            live = quad(f_pdf, 0, x, args=(a, b), epsabs=1e-14, limit=200)[0]
            assert abs(d.f_cdf(x, a, b) - live) <= 1e-8

    def test_chisq(self):
        rng = np.random.default_rng(4)
        for x, k in zip(rng.uniform(0.01, 40, self.N), rng.uniform(2, 30, self.N)):
            live = quad(chisq_pdf, 0, x, args=(k,), epsabs=1e-14, limit=200)[0]
            assert abs(d.chisq_cdf(x, k) - live) <= 1e-8
