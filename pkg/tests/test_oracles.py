import math

import numpy as np
import pytest

from crossprob.boundaries import BoundaryPair
from crossprob.engine import ecdf_noncrossing, poisson_noncrossing_conditional, poisson_noncrossing_unconditional
from crossprob.oracles import (
    CHUNK_TRIALS,
    MonteCarloResult,
    _binomial_pmf,
    ecdf_noncrossing_binomial_recursion,
    monte_carlo_ecdf,
    monte_carlo_poisson,
    paths_within,
)

from cases import random_boundary


def test_binomial_pmf_matches_scipy():
    from scipy import stats

    for trials, p in ((10, 0.3), (250, 0.01), (40, 0.999)):
        np.testing.assert_allclose(_binomial_pmf(trials, p, trials + 1),
                                   stats.binom.pmf(np.arange(trials + 1), trials, p),
                                   rtol=1e-11, atol=1e-300)
    assert _binomial_pmf(5, 0.0, 3).tolist() == [1.0, 0.0, 0.0]
    assert _binomial_pmf(2, 1.0, 4).tolist() == [0.0, 0.0, 1.0, 0.0]


@pytest.mark.parametrize("n", [1, 5, 40])
def test_recursion_unconstrained_is_one(n):
    assert ecdf_noncrossing_binomial_recursion(BoundaryPair.unconstrained(n)) == pytest.approx(1.0, abs=1e-13)


def test_recursion_n1_two_sided():
    assert ecdf_noncrossing_binomial_recursion(BoundaryPair(1, [0.75], 0, [0.25])) == pytest.approx(0.5, abs=1e-12)


def test_recursion_empty_band_and_negative_cap():
    assert ecdf_noncrossing_binomial_recursion(BoundaryPair(3, [0.2, 0.2, 0.2], 1, [])) == 0.0
    assert ecdf_noncrossing_binomial_recursion(BoundaryPair(3, [], -1, [0.5])) == 0.0


def test_recursion_crossings_at_time_one():
    # the only checkpoint is t = 1, where all constraints bind at once
    bp = BoundaryPair(2, [1.0, 1.0], 2, [1.0])
    assert ecdf_noncrossing_binomial_recursion(bp) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_recursion_matches_engine_n10(seed):
    bp = random_boundary(np.random.default_rng(seed), 10)
    ref = ecdf_noncrossing_binomial_recursion(bp)
    got = ecdf_noncrossing(bp)
    assert got == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_std_error_formula():
    r = MonteCarloResult.from_hits(30, 100, seed=4)
    assert r.std_error == pytest.approx(math.sqrt(0.3 * 0.7 / 100))
    assert r.generator == "PCG64" and r.seed == 4


def test_paths_within_order_statistic_rule():
    bp = BoundaryPair(2, [0.5], 1, [0.4])
    pts = np.array([[0.1, 0.45], [0.1, 0.3], [0.6, 0.7], [0.2, 0.4]])
    # second jump must come at or after 0.4; first jump by 0.5
    assert paths_within(bp, pts).tolist() == [True, False, False, True]


def test_paths_within_counts():
    bp = BoundaryPair(3, [0.5, 0.6], 1, [])
    assert not paths_within(bp, np.array([[0.1]])).any()  # too few jumps
    assert not paths_within(bp, np.array([[0.1, 0.2]])).any()  # too many for cap 1
    assert not paths_within(BoundaryPair(3, [], -1, []), np.zeros((2, 0))).any()


def test_mc_unconstrained_exact_one():
    r = monte_carlo_ecdf(BoundaryPair.unconstrained(5), 1000, seed=0)
    assert r.estimate == 1.0 and r.std_error == 0.0
    r = monte_carlo_poisson(BoundaryPair(5, [], 10**6, []), 1000, seed=0, given_count=3)
    assert r.estimate == 1.0


def test_mc_empty_band_exact_zero():
    assert monte_carlo_ecdf(BoundaryPair(3, [0.2, 0.2, 0.2], 1, []), 1000, seed=0).estimate == 0.0


def test_mc_n1_two_sided():
    r = monte_carlo_ecdf(BoundaryPair(1, [0.75], 0, [0.25]), 10**6, seed=1)
    assert abs(r.estimate - 0.5) <= 3 * 0.0005


def test_mc_no_jump_probability():
    n = 2
    r = monte_carlo_poisson(BoundaryPair(n, [], 0, []), 200_000, seed=9)
    assert abs(r.estimate - math.exp(-n)) <= 3 * r.std_error


def test_mc_poisson_lower_crossing():
    n = 3
    bp = BoundaryPair(n, [0.5], 10**6, [])
    r = monte_carlo_poisson(bp, 200_000, seed=2)
    assert abs(r.estimate - poisson_noncrossing_unconditional(bp)) <= 4 * r.std_error


@pytest.mark.parametrize("seed", range(3))
def test_mc_matches_engine_random(seed):
    rng = np.random.default_rng(100 + seed)
    bp = random_boundary(rng, 25, "band")
    exact = ecdf_noncrossing(bp)
    r = monte_carlo_ecdf(bp, 100_000, seed=seed)
    sigma = math.sqrt(exact * (1 - exact) / r.trials)
    assert abs(r.estimate - exact) <= 4 * sigma + 1e-12
    k = 27
    exact_c = poisson_noncrossing_conditional(bp, k)
    rc = monte_carlo_poisson(bp, 100_000, seed=seed, given_count=k)
    sigma_c = math.sqrt(exact_c * (1 - exact_c) / rc.trials)
    assert abs(rc.estimate - exact_c) <= 4 * sigma_c + 1e-12


def test_mc_determinism_and_worker_independence():
    bp = random_boundary(np.random.default_rng(7), 12, "wobbly")
    trials = 2 * CHUNK_TRIALS + 123
    a = monte_carlo_ecdf(bp, trials, seed=42)
    b = monte_carlo_ecdf(bp, trials, seed=42, workers=3)
    c = monte_carlo_ecdf(bp, trials, seed=42)
    assert a == b == c
    d = monte_carlo_poisson(bp, trials, seed=42)
    e = monte_carlo_poisson(bp, trials, seed=42, workers=2)
    assert d == e
    assert monte_carlo_ecdf(bp, trials, seed=43) != a


def test_mc_rejects_zero_trials():
    with pytest.raises(ValueError):
        monte_carlo_ecdf(BoundaryPair.unconstrained(2), 0, seed=0)
    with pytest.raises(ValueError):
        monte_carlo_poisson(BoundaryPair.unconstrained(2), 0, seed=0)
