"""Timing harness for the propagation methods and log-log scaling fits.

Times are wall-clock seconds from ``time.perf_counter``, one untimed
warm-up run first, then the median of the timed repeats. The engine is
single-threaded (``scipy.fft`` uses one worker unless told otherwise).
"""
from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .boundaries import compile_schedule
from .engine import ecdf_noncrossing
from .errors import NumericalFailure
from .gof import StatisticSpec, boundaries_from_threshold, critical_value

CSV_FIELDS = ("n", "method", "wall_time_ms", "probability", "checkpoints")
AGREEMENT_RTOL = 1e-8


@dataclass(frozen=True)
class ScalingFit:
    points: list
    slope: float
    intercept: float
    r_squared: float

    def predict(self, n):
        return math.exp(self.intercept) * n**self.slope


@dataclass(frozen=True)
class BenchRow:
    n: int
    method: str
    wall_time_ms: float
    probability: float
    checkpoints: int

    def as_dict(self):
        return {f: getattr(self, f) for f in CSV_FIELDS}


def time_method(method, n, bp, repeats=3, full=False):
    """(median seconds, probability) of the ECDF non-crossing computation."""
    if repeats < 3:
        raise ValueError("need at least 3 timed repeats")
    if bp.n != n:
        raise ValueError(f"boundary pair is for n={bp.n}, not {n}")
    prob = ecdf_noncrossing(bp, method, full=full)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        p = ecdf_noncrossing(bp, method, full=full)
        times.append(time.perf_counter() - start)
        if p != prob:
            raise NumericalFailure(f"non-deterministic result: {p!r} vs {prob!r}")
    return statistics.median(times), prob


def fit_scaling(points) -> ScalingFit:
    """Least-squares line through (log n, log seconds)."""
    pts = [(int(n), float(t)) for n, t in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points for a scaling fit")
    if not all(n > 0 and 0.0 < t < math.inf for n, t in pts):
        raise ValueError("n and times must be positive and finite")
    x = np.log([n for n, _ in pts])
    y = np.log([t for _, t in pts])
    if np.ptp(x) == 0:
        raise ValueError("all n are equal; slope undefined")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(pts, float(slope), float(intercept), r2)


def calibrated_boundary(n, statistic="ks_two_sided", alpha=0.05, rtol=1e-8):
    """Boundaries of ``statistic`` at its exact level-``alpha`` critical value."""
    spec = StatisticSpec(statistic, n)
    return boundaries_from_threshold(spec, critical_value(spec, alpha, rtol=rtol))


def run_bench(n_list, methods=("fft", "direct"), statistic="ks_two_sided", alpha=0.05,
              repeats=3, full=False, rtol=1e-8, progress=None):
    """Time every method at every n; returns (rows, {method: ScalingFit or None}).

    Raises :class:`NumericalFailure` when methods disagree beyond
    :data:`AGREEMENT_RTOL` at some n.
    """
    rows = []
    for n in n_list:
        bp = calibrated_boundary(n, statistic, alpha, rtol)
        checkpoints = len(compile_schedule(bp, cap=n))
        probs = {}
        for method in methods:
            secs, p = time_method(method, n, bp, repeats, full=full)
            probs[method] = p
            row = BenchRow(n, method, secs * 1e3, p, checkpoints)
            rows.append(row)
            if progress is not None:
                progress(row)
        ref = next(iter(probs.values()))
        for method, p in probs.items():
            if abs(p - ref) > AGREEMENT_RTOL * abs(ref):
                raise NumericalFailure(f"n={n}: {method} gives {p!r}, expected {ref!r}")
    fits = {}
    for method in methods:
        pts = [(r.n, r.wall_time_ms / 1e3) for r in rows if r.method == method]
        distinct = len({n for n, _ in pts})
        fits[method] = fit_scaling(pts) if len(pts) >= 3 and distinct > 1 else None
    return rows, fits


def write_csv(rows, stream):
    writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        d = row.as_dict()
        d["probability"] = repr(d["probability"])
        writer.writerow(d)
