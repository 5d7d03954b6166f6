"""Exact p-values for supremum-type goodness-of-fit statistics.

Every statistic here is a max (or, for Berk-Jones, a min) over ``i`` of a
per-index function of the ``i``-th order statistic ``u_(i)`` of the
probability-integral-transformed sample. Each per-index function is
monotone in ``u``, so the event ``statistic not extreme at level t`` is a
conjunction of bounds ``lower_i(t) < u_(i) < upper_i(t)``. In counting-path
form that is a lower crossing at ``upper_i(t)`` (the i-th point must have
arrived) and an upper crossing at ``lower_i(t)`` (the i-th point must not
have arrived), and the p-value is one minus the ECDF non-crossing
probability of those boundaries.

Statistics:

``ks_plus``, ``ks_minus``, ``ks_two_sided``
    sqrt(n) max(i/n - u_(i)), sqrt(n) max(u_(i) - (i-1)/n) and their max.
``higher_criticism``
    max sqrt(n) (i/n - u_(i)) / sqrt(u_(i) (1 - u_(i))), one-sided.
``berk_jones_one_sided``, ``berk_jones_two_sided``
    min_i B_i(u_(i)) and min_i min(B_i(u_(i)), 1 - B_i(u_(i))), where B_i is
    the Beta(i, n - i + 1) cdf of ``u_(i)`` under the null. Small values are
    extreme; p-value = P(M <= t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .boundaries import BoundaryPair, compile_schedule
from .engine import ecdf_noncrossing
from .errors import NumericalFailure
from .special import beta_quantile, betainc

STATISTICS = (
    "ks_two_sided",
    "ks_plus",
    "ks_minus",
    "berk_jones_two_sided",
    "berk_jones_one_sided",
    "higher_criticism",
)


@dataclass(frozen=True)
class StatisticSpec:
    """A named statistic at sample size ``n`` with its threshold inversions.

    ``invert_upper(t)`` returns, for every ``i``, the time ``u`` with
    ``r_i(u) = t`` for the increasing family (``u_(i)`` must stay below it),
    or ``None`` if the statistic has no such side. ``invert_lower(t)`` does
    the same for the decreasing family (``u_(i)`` must stay above it).
    """

    name: str
    n: int

    def __post_init__(self):
        if self.name not in STATISTICS:
            raise ValueError(f"unknown statistic {self.name!r}; choose from {STATISTICS}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")

    @property
    def small_is_extreme(self):
        return self.name.startswith("berk_jones")

    @property
    def two_sided(self):
        return self.name in ("ks_two_sided", "berk_jones_two_sided")

    def _index(self):
        return np.arange(1, self.n + 1, dtype=float)

    def invert_upper(self, t):
        n, i = self.n, self._index()
        if self.name in ("ks_two_sided", "ks_minus"):
            return np.clip((i - 1.0) / n + t / math.sqrt(n), 0.0, 1.0)
        if self.name == "berk_jones_two_sided":
            if t <= 0.0:
                return np.ones(n)
            if t >= 0.5:
                return np.zeros(n)
            # upper tail of Beta(i, n-i+1) at u equals lower tail of Beta(n-i+1, i) at 1-u
            return 1.0 - beta_quantile(n - i + 1.0, i, t)
        return None

    def invert_lower(self, t):
        n, i = self.n, self._index()
        if self.name in ("ks_two_sided", "ks_plus"):
            return np.clip(i / n - t / math.sqrt(n), 0.0, 1.0)
        if self.name.startswith("berk_jones"):
            if t <= 0.0:
                return np.zeros(n)
            if t >= 1.0:
                return np.ones(n)
            if self.two_sided and t >= 0.5:
                return np.ones(n)
            return beta_quantile(i, n - i + 1.0, t)
        if self.name == "higher_criticism":
            return _hc_inverse(i / n, n, t)
        return None

    def achievable_range(self):
        """(inf, sup) of the statistic over samples; sup may be inf."""
        rn = math.sqrt(self.n)
        if self.name == "ks_two_sided":
            return 0.5 / rn, rn
        if self.name in ("ks_plus", "ks_minus"):
            return 0.0, rn
        if self.name == "berk_jones_two_sided":
            return 0.0, 0.5
        if self.name == "berk_jones_one_sided":
            return 0.0, 1.0
        return 0.0, math.inf


def _hc_inverse(a, n, t):
    if math.isinf(t):
        return np.zeros_like(a) if t > 0 else np.ones_like(a)
    # sqrt(n)(a - u) = t sqrt(u(1-u))  ->  (n + t^2) u^2 - (2an + t^2) u + n a^2 = 0
    t2 = t * t
    qa = n + t2
    qb = 2.0 * a * n + t2
    disc = np.maximum(qb * qb - 4.0 * qa * n * a * a, 0.0)
    root = np.sqrt(disc)
    # the decreasing branch: smaller root for t >= 0, larger for t < 0
    u = (qb - root) / (2.0 * qa) if t >= 0 else (qb + root) / (2.0 * qa)
    return np.clip(u, 0.0, 1.0)


def _check_sample(spec, u):
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != spec.n:
        raise ValueError(f"expected {spec.n} transformed samples, got shape {u.shape}")
    if np.any(np.isnan(u)) or np.any((u < 0) | (u > 1)):
        raise ValueError("transformed samples must lie in [0, 1]")
    if np.any(np.diff(u) < 0):
        raise ValueError("samples must be sorted")
    return u


def compute_statistic(spec: StatisticSpec, u_sorted):
    """Value of ``spec``'s statistic on sorted probability-transformed samples."""
    u = _check_sample(spec, u_sorted)
    n = spec.n
    i = np.arange(1, n + 1, dtype=float)
    rn = math.sqrt(n)
    if spec.name.startswith("ks"):
        k_plus = rn * float(np.max(i / n - u))
        k_minus = rn * float(np.max(u - (i - 1.0) / n))
        return {"ks_plus": k_plus, "ks_minus": k_minus}.get(spec.name, max(k_plus, k_minus))
    if spec.name == "higher_criticism":
        with np.errstate(divide="ignore", invalid="ignore"):
            hc = rn * (i / n - u) / np.sqrt(u * (1.0 - u))
        # 0/0 cannot occur: at u = 0 the numerator is positive, at u = 1 it is <= 0
        hc = np.where(np.isnan(hc), 0.0, hc)
        return float(np.max(hc))
    lower_tail = betainc(i, n - i + 1.0, u)
    if spec.name == "berk_jones_one_sided":
        return float(np.min(lower_tail))
    upper_tail = betainc(i, n - i + 1.0, u, upper=True)
    return float(np.min(np.minimum(lower_tail, upper_tail)))


def boundaries_from_threshold(spec: StatisticSpec, t) -> BoundaryPair:
    """Boundaries whose ECDF non-crossing event is ``statistic not extreme at t``.

    Lower crossings are the sorted ``invert_upper(t)`` times; the cap starts at
    the number of ``invert_lower(t)`` times at or below 0 and rises by one at
    each remaining one. A missing side is left unconstrained.
    """
    t = float(t)
    if math.isnan(t):
        raise ValueError("threshold is NaN")
    ups = spec.invert_upper(t)
    lows = spec.invert_lower(t)
    lower = np.sort(ups) if ups is not None else np.empty(0)
    if lows is None:
        return BoundaryPair(spec.n, lower, spec.n, [])
    lows = np.sort(lows)
    c0 = int(np.count_nonzero(lows <= 0.0))
    return BoundaryPair(spec.n, lower, c0, lows[c0:])


@dataclass(frozen=True)
class PValueReport:
    statistic: str
    statistic_value: float
    p_value: float
    n: int
    lower_crossings: int
    upper_crossings: int
    checkpoints: int
    method: str


def pvalue(spec: StatisticSpec, t, method="fft", **kw) -> PValueReport:
    """Exact null p-value of observing the statistic at ``t``.

    ``P(T >= t)`` for max-type statistics, ``P(M <= t)`` for Berk-Jones.
    """
    bp = boundaries_from_threshold(spec, t)
    if method == "binomial-oracle":
        from .oracles import ecdf_noncrossing_binomial_recursion

        inside = ecdf_noncrossing_binomial_recursion(bp)
    else:
        inside = ecdf_noncrossing(bp, method, **kw)
    p = min(1.0, max(0.0, 1.0 - inside))
    return PValueReport(
        spec.name,
        float(t),
        p,
        spec.n,
        int(bp.lower_crossings.size),
        int(bp.upper_crossings.size),
        len(compile_schedule(bp, cap=spec.n)),
        method,
    )


def sample_pvalue(spec: StatisticSpec, u_sorted, method="fft", **kw) -> PValueReport:
    return pvalue(spec, compute_statistic(spec, u_sorted), method, **kw)


def critical_value(spec: StatisticSpec, alpha, rtol=1e-10, method="fft", **kw):
    """Threshold ``t`` whose exact p-value equals ``alpha``.

    Bracketed root finding (Brent) on the monotone map ``t -> pvalue(t)``;
    Berk-Jones thresholds are searched in log scale. If even the least
    extreme achievable threshold has p-value at most ``alpha``, that
    threshold is returned.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")

    def p_at(t):
        return pvalue(spec, t, method, **kw).p_value

    t_min, t_max = spec.achievable_range()
    if spec.small_is_extreme:
        hi = t_max
        if p_at(hi) <= alpha:
            return hi
        lo = hi / 4.0
        while p_at(lo) > alpha:
            lo /= 16.0
            if lo < 1e-300:
                raise NumericalFailure("could not bracket the critical value")

        def f(x):
            return p_at(math.exp(x)) - alpha

        x = brentq(f, math.log(lo), math.log(hi), xtol=1e-300, rtol=rtol / 4, maxiter=200)
        return math.exp(x)

    lo = t_min
    if p_at(lo) <= alpha:
        return lo
    hi = t_max
    if math.isinf(hi):
        hi = max(1.0, 2.0 * lo)
        while p_at(hi) > alpha:
            hi *= 2.0
            if hi > 1e300:
                raise NumericalFailure("could not bracket the critical value")
    elif p_at(hi) > alpha:
        raise NumericalFailure("p-value is not decreasing across the achievable range")
    return brentq(lambda t: p_at(t) - alpha, lo, hi, xtol=1e-300, rtol=rtol, maxiter=200)
