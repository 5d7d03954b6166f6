"""Non-crossing probabilities of a Poisson process and of the uniform empirical CDF.

The joint probability ``Q(t, m)`` of staying inside the boundaries up to
time ``t`` and sitting in state ``m`` at ``t`` is pushed from one checkpoint
to the next by convolving with the Poisson(n * dt) pmf and discarding
states outside the arrival band. After the last checkpoint (t = 1)::

    P(no crossing, xi(1) = k)       = Q(1, k)
    P(no crossing | xi(1) = k)      = Q(1, k) / P(Poisson(n) = k)
    P(ECDF of n uniforms in bounds) = Q(1, n) / P(Poisson(n) = n)

The last identity holds because n * F_n(t) has the law of a rate-n Poisson
process conditioned on n arrivals by time 1. Everything is carried in log
scale; the single ``exp`` happens when a probability is returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundaries import BoundaryPair, CheckpointSchedule, compile_schedule
from .convolution import (
    ScaledProbVector,
    fft_band,
    kernel_range,
    poisson_kernel,
    transform_size,
    truncated_convolve,
)
from .errors import NumericalFailure
from .special import poisson_logpmf

METHODS = ("fft", "direct")
# raw probabilities may exceed one by rounding only
_ONE_SLACK = 1e-9


@dataclass
class PropagationResult:
    final_vector: ScaledProbVector
    steps: int = 0
    work_profile: list = field(default_factory=list)

    def log_prob_terminal(self, k):
        """log Q(1, k), or -inf."""
        return self.final_vector.log_prob(k)

    def log_total(self):
        return self.final_vector.log_total()


def unconditional_state_limit(n):
    """Highest state tracked when the process is not conditioned on xi(1).

    P(Poisson(n) > limit) is below 1e-30 for every n >= 1; mass above it is
    dropped.
    """
    return int(n + math.ceil(12.0 * math.sqrt(n) + 40.0))


def propagate(n, schedule: CheckpointSchedule, method="fft", *, limit=None,
              crossover=None, full=False) -> PropagationResult:
    """Push the point mass at state 0 through every checkpoint of ``schedule``.

    ``method="fft"`` convolves through :func:`truncated_convolve` (which
    falls back to a direct sum for operands narrower than ``crossover``);
    ``method="direct"`` always evaluates each state as an explicit sum.
    ``limit`` caps the tracked states (defaults to
    :func:`unconditional_state_limit`). ``full=True`` runs every step on
    arrays covering all states ``0..limit``, which is the band-oblivious
    reference cost model.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if n <= 0:
        raise ValueError("intensity n must be positive")
    limit = unconditional_state_limit(n) if limit is None else int(limit)
    q = ScaledProbVector.point_mass(0)
    if schedule.initial_cap < 0 or limit < 0:
        return PropagationResult(ScaledProbVector.zero())
    arr_lo, arr_hi = schedule.arrival_bands()
    np.minimum(arr_hi, limit, out=arr_hi)
    if full:
        return _propagate_full(n, schedule.times, arr_lo, arr_hi, method, limit)
    conv_method = "direct" if method == "direct" else "auto"
    profile = []
    t_prev = 0.0
    for t, lo, hi in zip(schedule.times.tolist(), arr_lo.tolist(), arr_hi.tolist()):
        lo = max(lo, q.offset)
        if lo > hi:
            return PropagationResult(ScaledProbVector.zero(lo), len(profile), profile)
        k_lo, k_hi = kernel_range(q, lo, hi)
        kernel = poisson_kernel(n * (t - t_prev), k_hi - k_lo + 1, start=k_lo)
        q = truncated_convolve(q, kernel, (lo, hi), method=conv_method, crossover=crossover)
        profile.append((min(q.top, hi) - lo + 1, k_hi - k_lo + 1))
        if q.is_zero:
            return PropagationResult(ScaledProbVector.zero(lo), len(profile), profile)
        t_prev = t
    return PropagationResult(q, len(profile), profile)


def _propagate_full(n, times, arr_lo, arr_hi, method, limit):
    # every step convolves length limit+1 arrays in full, whatever the band
    length = limit + 1
    size = transform_size(2 * length)
    q = np.zeros(length)
    q[0] = 1.0
    ka = np.zeros(length)
    q_lo = q_top = 0
    log_scale = 0.0
    profile = []
    t_prev = 0.0
    for t, lo, hi in zip(times.tolist(), arr_lo.tolist(), arr_hi.tolist()):
        lo = max(lo, q_lo)
        if lo > hi:
            return PropagationResult(ScaledProbVector.zero(lo), len(profile), profile)
        k_lo, k_hi = max(0, lo - q_top), hi - q_lo
        kernel = poisson_kernel(n * (t - t_prev), k_hi - k_lo + 1, start=k_lo)
        if math.isinf(kernel.log_scale):
            return PropagationResult(ScaledProbVector.zero(lo), len(profile), profile)
        ka.fill(0.0)
        ka[k_lo : k_hi + 1] = kernel.values
        if method == "direct":
            raw = np.convolve(q, ka)[lo : hi + 1]
        else:
            raw = fft_band(q, ka, size, lo, hi)
        peak = float(raw.max())
        if not math.isfinite(peak):
            raise NumericalFailure("non-finite entries in probability vector")
        profile.append((hi - lo + 1, length))
        if peak <= 0.0:
            return PropagationResult(ScaledProbVector.zero(lo), len(profile), profile)
        q.fill(0.0)
        np.divide(raw, peak, out=q[lo : hi + 1])
        log_scale += kernel.log_scale + math.log(peak)
        q_lo, q_top = lo, hi
        t_prev = t
    return PropagationResult(ScaledProbVector(q_lo, q[q_lo : q_top + 1].copy(), log_scale),
                             len(profile), profile)


def _checked_log(log_p):
    if math.isnan(log_p):
        raise NumericalFailure("probability evaluated to NaN")
    if log_p > math.log1p(_ONE_SLACK):
        raise NumericalFailure(f"probability {math.exp(log_p)!r} exceeds one")
    return min(log_p, 0.0)


def _exp(log_p):
    return math.exp(log_p) if log_p > -math.inf else 0.0


def log_poisson_noncrossing_conditional(bp: BoundaryPair, k, method="fft", **kw):
    """log P(path stays in bounds | xi(1) = k) for the rate-``bp.n`` process."""
    if k < 0:
        raise ValueError("conditioning count must be non-negative")
    res = propagate(bp.n, compile_schedule(bp), method, limit=k, **kw)
    log_q = res.log_prob_terminal(k)
    if log_q == -math.inf:
        return -math.inf
    return _checked_log(log_q - poisson_logpmf(k, bp.n))


def poisson_noncrossing_conditional(bp: BoundaryPair, k, method="fft", **kw):
    return _exp(log_poisson_noncrossing_conditional(bp, k, method, **kw))


def log_poisson_noncrossing_unconditional(bp: BoundaryPair, method="fft", **kw):
    """log P(path stays in bounds on [0, 1]); sum of Q(1, m) over the terminal band."""
    res = propagate(bp.n, compile_schedule(bp), method, **kw)
    return _checked_log(res.log_total())


def poisson_noncrossing_unconditional(bp: BoundaryPair, method="fft", **kw):
    return _exp(log_poisson_noncrossing_unconditional(bp, method, **kw))


def log_ecdf_noncrossing(bp: BoundaryPair, method="fft", **kw):
    """log P(n F_n stays in bounds) for the ECDF of ``bp.n`` uniforms."""
    n = bp.n
    res = propagate(n, compile_schedule(bp, cap=n), method, limit=n, **kw)
    log_q = res.log_prob_terminal(n)
    if log_q == -math.inf:
        return -math.inf
    return _checked_log(log_q - poisson_logpmf(n, n))


def ecdf_noncrossing(bp: BoundaryPair, method="fft", **kw):
    return _exp(log_ecdf_noncrossing(bp, method, **kw))
