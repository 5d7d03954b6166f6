"""Special functions: accurate Poisson log-pmf and the regularized incomplete beta.

The Poisson log-pmf uses Loader's saddle-point decomposition
(``stirlerr`` + ``bd0``), which keeps full relative accuracy for large
arguments where ``k*log(lam) - lam - lgamma(k+1)`` cancels badly.

The incomplete beta is evaluated with the modified Lentz algorithm on the
standard continued fraction and vectorised over numpy arrays so that the
quantiles for all order statistics of a sample can be bisected at once.
"""
import math

import numpy as np
from scipy.special import gammaln as _gammaln

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

_S0 = 1.0 / 12.0
_S1 = 1.0 / 360.0
_S2 = 1.0 / 1260.0
_S3 = 1.0 / 1680.0
_S4 = 1.0 / 1188.0


def stirlerr(k):
    """log(k!) - log(sqrt(2 pi k) (k/e)^k), for integer k >= 1."""
    if k <= 15:
        return math.lgamma(k + 1.0) - (k + 0.5) * math.log(k) + k - _LN_SQRT_2PI
    kk = float(k) * k
    if k > 500:
        return (_S0 - _S1 / kk) / k
    if k > 80:
        return (_S0 - (_S1 - _S2 / kk) / kk) / k
    if k > 35:
        return (_S0 - (_S1 - (_S2 - _S3 / kk) / kk) / kk) / k
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / kk) / kk) / kk) / kk) / k


def bd0(x, mu):
    """Deviance term x*log(x/mu) + mu - x, stable for x close to mu."""
    if abs(x - mu) < 0.1 * (x + mu):
        v = (x - mu) / (x + mu)
        s = (x - mu) * v
        ej = 2.0 * x * v
        v2 = v * v
        for j in range(1, 1000):
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
        return s
    return x * math.log(x / mu) + mu - x


def poisson_logpmf(k, lam):
    """Natural log of P(Z = k) for Z ~ Poisson(lam)."""
    if lam < 0:
        raise ValueError("Poisson intensity must be non-negative")
    if k < 0:
        return -math.inf
    if lam == 0.0:
        return 0.0 if k == 0 else -math.inf
    if k == 0:
        return -lam
    return -stirlerr(k) - bd0(float(k), lam) - _LN_SQRT_2PI - 0.5 * math.log(k)


# --- regularized incomplete beta ------------------------------------------------

_TINY = 1e-300
_CF_EPS = 1e-15
_CF_MAX_ITER = 20000


def _log_beta_prefactor(a, b, x):
    # log( x^a (1-x)^b / (a B(a,b)) )
    lbeta = _gammaln(a) + _gammaln(b) - _gammaln(a + b)
    return a * np.log(x) + b * np.log1p(-x) - lbeta - np.log(a)


def _betacf(a, b, x):
    """Continued fraction for I_x(a,b), modified Lentz; arrays broadcast."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _CF_EPS
        if not active.any():
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a, b, x, upper=False):
    """Regularized incomplete beta I_x(a, b), or its complement if ``upper``.

    Vectorised over broadcastable ``a``, ``b``, ``x``. The complement is
    evaluated directly (not as ``1 - I``) so small upper tails keep their
    relative accuracy.
    """
    a, b, x = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(x, dtype=float)
    )
    if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
        raise ValueError("x must lie in [0, 1]")
    if np.any((a <= 0) | (b <= 0)):
        raise ValueError("a and b must be positive")
    out = np.empty(x.shape)
    lower_edge = x == 0.0
    upper_edge = x == 1.0
    inner = ~(lower_edge | upper_edge)
    out[lower_edge] = 1.0 if upper else 0.0
    out[upper_edge] = 0.0 if upper else 1.0
    if inner.any():
        ai, bi, xi = a[inner], b[inner], x[inner]
        # the fraction converges fast only below the mean-ish split point
        direct = xi < (ai + 1.0) / (ai + bi + 2.0)
        res = np.empty(xi.shape)
        if direct.any():
            aa, bb, xx = ai[direct], bi[direct], xi[direct]
            tail = np.exp(_log_beta_prefactor(aa, bb, xx)) * _betacf(aa, bb, xx)
            res[direct] = 1.0 - tail if upper else tail
        flip = ~direct
        if flip.any():
            aa, bb, xx = bi[flip], ai[flip], 1.0 - xi[flip]
            tail = np.exp(_log_beta_prefactor(aa, bb, xx)) * _betacf(aa, bb, xx)
            res[flip] = tail if upper else 1.0 - tail
        out[inner] = res
    return out if out.ndim else float(out)


def beta_quantile(a, b, p, max_iter=80, tol=1e-14):
    """Inverse of I_x(a, b) in x by bracketed bisection on [0, 1].

    Iterates until every bracket is narrower than ``tol`` relative to its
    midpoint (absolute below 1e-300), or ``max_iter`` halvings.
    """
    a, b, p = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(p, dtype=float)
    )
    lo = np.zeros(p.shape)
    hi = np.ones(p.shape)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = betainc(a, b, mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= tol * np.maximum(mid, 1e-300)):
            break
    out = 0.5 * (lo + hi)
    out = np.where(p <= 0.0, 0.0, np.where(p >= 1.0, 1.0, out))
    return out if out.ndim else float(out)
