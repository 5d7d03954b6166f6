import math

import mpmath
import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from scipy import special as sps
from scipy import stats

from crossprob.special import bd0, beta_quantile, betainc, poisson_logpmf, stirlerr

# log P(Poisson(lam) = k), mpmath at 50 digits
POISSON_LOGPMF = [
    (2000, 2000.0, -4.719431429642033367),
    (0, 1e-3, -0.0010000000000000000208),
    (5, 0.1, -16.400417207752274142),
    (100000, 100000.0, -6.6754020990231202824),
    (10, 1000.5, -946.5218610328376343),
    (250000, 249000.0, -9.1388963496647850157),
]

# regularized incomplete beta I_x(a, b) and its complement, mpmath at 50 digits
BETA_CDF = [
    (2.0, 3.0, 0.4, 0.52480000000000003837, 0.47519999999999996163),
    (10.5, 0.5, 0.99, 0.64984365807809124098, 0.35015634192190875902),
    (1.0, 1000.0, 1e-4, 0.095167106441453749297, 0.9048328935585462507),
    (500.0, 501.0, 0.5, 0.51261250908918040095, 0.48738749091081959905),
    (0.5, 0.5, 1e-8, 0.000063661977342861430846, 0.99993633802265713857),
    (3000.0, 2000.0, 0.61, 0.92584945028870167256, 0.074150549711298327444),
]


@pytest.mark.parametrize("k, lam, expected", POISSON_LOGPMF)
def test_poisson_logpmf_reference(k, lam, expected):
    assert poisson_logpmf(k, lam) == pytest.approx(expected, rel=1e-14, abs=1e-15)


def test_poisson_logpmf_edges():
    assert poisson_logpmf(0, 0.0) == 0.0
    assert poisson_logpmf(3, 0.0) == -math.inf
    assert poisson_logpmf(-1, 2.0) == -math.inf


@given(st.integers(0, 5000), st.floats(1e-3, 1e4))
@settings(max_examples=200, deadline=None)
def test_poisson_logpmf_matches_scipy(k, lam):
    ref = stats.poisson.logpmf(k, lam)
    assert poisson_logpmf(k, lam) == pytest.approx(ref, rel=1e-11, abs=1e-11)


def test_stirlerr_definition():
    mpmath.mp.dps = 50
    for k in (1, 2, 7, 15, 16, 40, 500, 1e5):
        # the defining difference cancels badly in double precision for large k
        ref = float(mpmath.loggamma(k + 1) - (k + 0.5) * mpmath.log(k) + k - mpmath.log(2 * mpmath.pi) / 2)
        assert stirlerr(k) == pytest.approx(ref, rel=1e-12)


def test_bd0_is_nonnegative_and_zero_on_diagonal():
    assert bd0(10.0, 10.0) == 0.0
    for x, mu in ((1.0, 3.0), (500.0, 499.5), (2.0, 1e4)):
        assert bd0(x, mu) > 0.0
        ref = x * math.log(x / mu) + mu - x
        assert bd0(x, mu) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("a, b, x, lower, upper", BETA_CDF)
def test_betainc_reference(a, b, x, lower, upper):
    assert betainc(a, b, x) == pytest.approx(lower, rel=1e-10)
    assert betainc(a, b, x, upper=True) == pytest.approx(upper, rel=1e-10)


def test_betainc_endpoints_and_vectorization():
    assert betainc(2.0, 3.0, 0.0) == 0.0
    assert betainc(2.0, 3.0, 1.0) == 1.0
    assert betainc(2.0, 3.0, 0.0, upper=True) == 1.0
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(betainc(4.0, 6.0, x), sps.betainc(4.0, 6.0, x), rtol=1e-10, atol=1e-300)


def test_betainc_rejects_bad_input():
    with pytest.raises(ValueError):
        betainc(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        betainc(1.0, 1.0, 1.5)


@given(st.floats(0.5, 2000), st.floats(0.5, 2000), st.floats(0, 1))
@example(0.5, 2.0, 5e-324)
@settings(max_examples=150, deadline=None)
def test_betainc_complement(a, b, x):
    lo = float(betainc(a, b, x))
    up = float(betainc(a, b, x, upper=True))
    assert lo + up == pytest.approx(1.0, abs=1e-12)
    # mpmath rather than scipy: scipy loses accuracy for subnormal x
    mpmath.mp.dps = 30
    ref = float(mpmath.betainc(a, b, 0, x, regularized=True))
    assert lo == pytest.approx(ref, rel=1e-8, abs=1e-290)


def test_beta_quantile_inverts_cdf():
    n = 200
    i = np.arange(1, n + 1, dtype=float)
    for p in (1e-10, 0.05, 0.5, 0.975):
        x = beta_quantile(i, n - i + 1.0, p)
        np.testing.assert_allclose(betainc(i, n - i + 1.0, x), p, rtol=1e-10)
        np.testing.assert_allclose(x, sps.betaincinv(i, n - i + 1.0, p), rtol=1e-10)


def test_beta_quantile_monotone_in_p():
    xs = [float(beta_quantile(3.0, 8.0, p)) for p in np.linspace(0.01, 0.99, 25)]
    assert np.all(np.diff(xs) > 0)
