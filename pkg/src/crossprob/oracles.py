"""Slow independent references for the non-crossing engine.

* :func:`ecdf_noncrossing_binomial_recursion` propagates the ECDF state
  directly with binomial transitions: of the ``n - l`` samples not yet seen
  by time ``t_i``, each lands in ``(t_i, t_{i+1}]`` with probability
  ``(t_{i+1} - t_i) / (1 - t_i)``. Plain double sums, no FFT, no Poisson.
* :func:`monte_carlo_ecdf` / :func:`monte_carlo_poisson` sample paths and
  test them against the raw crossing lists through order statistics, so
  they share no code with the schedule compiler or the propagators.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .boundaries import BoundaryPair, compile_schedule

GENERATOR = "PCG64"
CHUNK_TRIALS = 20_000


# --- binomial recursion ------------------------------------------------------


def _binomial_pmf(trials, p, length):
    """P(Binomial(trials, p) = j) for j < length, via the ratio recurrence."""
    out = np.zeros(length)
    top = min(trials, length - 1)
    if p <= 0.0:
        out[0] = 1.0
        return out
    if p >= 1.0:
        if trials < length:
            out[trials] = 1.0
        return out
    j = np.arange(top + 1, dtype=float)
    # log pmf at j=0 then cumulative log-ratios (trials - j)/(j + 1) * p/(1-p)
    log_ratio = np.log((trials - j[:-1]) / (j[:-1] + 1.0)) + math.log(p) - math.log1p(-p)
    logs = trials * math.log1p(-p) + np.concatenate(([0.0], np.cumsum(log_ratio)))
    out[: top + 1] = np.exp(logs)
    return out


def ecdf_noncrossing_binomial_recursion(bp: BoundaryPair):
    """P(n F_n stays in bounds), by direct binomial propagation (O(n^3) worst case)."""
    n = bp.n
    sched = compile_schedule(bp, cap=n)
    if sched.initial_cap < 0:
        return 0.0
    lo_arr, hi_arr = sched.arrival_bands()
    # state vector over 0..n, with a running log scale against underflow
    r = np.zeros(n + 1)
    r[0] = 1.0
    log_scale = 0.0
    t_prev = 0.0
    for t, lo, hi in zip(sched.times, lo_arr, hi_arr):
        lo, hi = int(lo), int(min(hi, n))
        if lo > hi:
            return 0.0
        if t_prev >= 1.0:
            p = 0.0
        else:
            p = min(1.0, (t - t_prev) / (1.0 - t_prev))
        nxt = np.zeros(n + 1)
        for ell in np.flatnonzero(r[: hi + 1]):
            pmf = _binomial_pmf(n - ell, p, hi - ell + 1)
            nxt[ell : hi + 1] += r[ell] * pmf
        nxt[:lo] = 0.0
        nxt[hi + 1 :] = 0.0
        peak = nxt.max()
        if peak <= 0.0:
            return 0.0
        r = nxt / peak
        log_scale += math.log(peak)
        t_prev = t
    return math.exp(log_scale) * r[n] if r[n] > 0 else 0.0


# --- Monte Carlo ---------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    trials: int
    std_error: float
    seed: int
    generator: str = GENERATOR

    @classmethod
    def from_hits(cls, hits, trials, seed):
        est = hits / trials
        return cls(est, trials, math.sqrt(est * (1.0 - est) / trials), seed)


def paths_within(bp: BoundaryPair, points):
    """Boolean mask: which rows of sorted jump times keep the path in bounds.

    ``points`` is a (trials, k) array of sorted jump times in [0, 1]; every
    row has the same jump count k. Lower crossing i needs the i-th jump no
    later than ``lower_crossings[i]``; the cap ``c0 + j`` in force on
    ``[u_j, u_{j+1})`` needs jump ``c0 + j + 1`` no earlier than ``u_{j+1}``;
    the final cap bounds the count itself.
    """
    trials, k = points.shape
    ok = np.ones(trials, dtype=bool)
    c0 = bp.upper_initial_cap
    if c0 < 0 or bp.lower_crossings.size > k or k > c0 + bp.upper_crossings.size:
        return np.zeros(trials, dtype=bool)
    a = bp.lower_crossings.size
    if a:
        ok &= np.all(points[:, :a] <= bp.lower_crossings, axis=1)
    # jump index c0 + j (0-based) must not precede upper crossing j (0-based)
    idx = c0 + np.arange(bp.upper_crossings.size)
    use = idx < k
    if use.any():
        ok &= np.all(points[:, idx[use]] >= bp.upper_crossings[use], axis=1)
    return ok


def _chunk_sizes(trials):
    full, rest = divmod(trials, CHUNK_TRIALS)
    return [CHUNK_TRIALS] * full + ([rest] if rest else [])


def _run_chunks(seed, trials, work, workers):
    sizes = _chunk_sizes(trials)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(np.random.Generator(np.random.PCG64(s)), m) for s, m in zip(seqs, sizes)]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return sum(pool.map(lambda job: work(*job), jobs))
    return sum(work(rng, m) for rng, m in jobs)


def monte_carlo_ecdf(bp: BoundaryPair, trials, seed, workers=None):
    """Fraction of simulated n-sample ECDFs that stay in bounds.

    Trials are split into fixed-size chunks, each with its own child of
    ``SeedSequence(seed)``, so the result does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    n = bp.n

    def work(rng, m):
        pts = np.sort(rng.random((m, n)), axis=1)
        return int(np.count_nonzero(paths_within(bp, pts)))

    return MonteCarloResult.from_hits(_run_chunks(seed, trials, work, workers), trials, seed)


def monte_carlo_poisson(bp: BoundaryPair, trials, seed, given_count=None, workers=None):
    """Fraction of simulated rate-n Poisson paths on [0, 1] that stay in bounds.

    With ``given_count`` the path has exactly that many jumps at sorted
    uniform times (the conditional law); otherwise the count is Poisson(n).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    n = bp.n

    def work(rng, m):
        if given_count is not None:
            counts = np.full(m, int(given_count))
        else:
            counts = rng.poisson(n, size=m)
        hits = 0
        for k in np.unique(counts):
            rows = int(np.count_nonzero(counts == k))
            pts = np.sort(rng.random((rows, int(k))), axis=1)
            hits += int(np.count_nonzero(paths_within(bp, pts)))
        return hits

    return MonteCarloResult.from_hits(_run_chunks(seed, trials, work, workers), trials, seed)
