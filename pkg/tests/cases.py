"""Randomized boundary generators shared by the test modules."""
import math

import numpy as np

from crossprob.boundaries import BoundaryPair

STYLES = ("band", "one_sided_lower", "one_sided_upper", "sparse", "wobbly")


def _lower_times(rng, n, width, jitter):
    i = np.arange(1, n + 1)
    t = (i - 1) / n + width + jitter * rng.standard_normal(n) / math.sqrt(n)
    return np.sort(np.clip(t, 0.0, 1.0))


def _upper(rng, n, width, jitter):
    i = np.arange(1, n + 1)
    t = np.sort(np.clip(i / n - width + jitter * rng.standard_normal(n) / math.sqrt(n), 0.0, 1.0))
    c0 = int(np.count_nonzero(t <= 0.0))
    return c0, t[c0:]


def random_boundary(rng, n, style=None):
    """A random BoundaryPair for ``n`` points of one of :data:`STYLES`.

    Widths are drawn on the 1/sqrt(n) scale so that non-crossing
    probabilities are mostly moderate, as for real test statistics.
    """
    if style is None:
        style = STYLES[rng.integers(len(STYLES))]
    scale = 1.0 / math.sqrt(n)
    w_lo = rng.uniform(0.4, 2.5) * scale
    w_hi = rng.uniform(0.4, 2.5) * scale
    jitter = rng.uniform(0.0, 0.3)
    if style == "band":
        c0, up = _upper(rng, n, w_hi, jitter)
        return BoundaryPair(n, _lower_times(rng, n, w_lo, jitter), c0, up)
    if style == "one_sided_lower":
        return BoundaryPair(n, _lower_times(rng, n, w_lo, jitter), n, [])
    if style == "one_sided_upper":
        c0, up = _upper(rng, n, w_hi, jitter)
        return BoundaryPair(n, [], c0, up)
    if style == "sparse":
        a = rng.integers(0, n + 1)
        lower = np.sort(rng.uniform(0.3, 1.0, a) ** 0.5)
        keep = np.sort(rng.choice(a, size=min(a, 3), replace=False)) if a else []
        lower = lower[keep]
        b = rng.integers(0, 4)
        c0 = int(rng.integers(max(0, n // 3), n + 1))
        upper = np.sort(rng.uniform(0.2, 0.9, b))
        return BoundaryPair(n, lower, c0, upper)
    # wobbly: two-sided band whose width drifts along the way
    i = np.arange(1, n + 1)
    drift = rng.uniform(-0.5, 0.5) * scale * np.sin(math.pi * i / n * rng.uniform(0.5, 3))
    lower = np.sort(np.clip((i - 1) / n + w_lo + drift, 0.0, 1.0))
    up = np.sort(np.clip(i / n - w_hi + drift, 0.0, 1.0))
    c0 = int(np.count_nonzero(up <= 0.0))
    return BoundaryPair(n, lower, c0, up[c0:])
