"""Step boundaries encoded by integer-crossing times, and checkpoint schedules.

A :class:`BoundaryPair` describes the admissible region for a counting path
``xi(t)`` on [0, 1]::

    low(t)  = #{i : lower_crossings[i] <= t}                 # xi(t) >= low(t)
    high(t) = upper_initial_cap + #{j : upper_crossings[j] <= t}   # xi(t) <= high(t)

Both step functions are right-continuous, i.e. a crossing time's constraint
is already active at the crossing time itself.

Converting continuous boundaries ``g < xi < h`` to this form: the i-th lower
crossing is ``inf{t : g(t) >= i - 1}`` (``xi`` must reach ``i`` once ``g``
touches ``i - 1``), the initial cap is ``ceil(h(0)) - 1`` and the j-th upper
crossing is ``sup{t : h(t) <= c0 + j}``.

Because a counting path with continuously distributed jump times almost
surely never jumps exactly at a fixed time, the cap that binds a path
arriving at checkpoint ``t_k`` is the cap in force on ``[t_{k-1}, t_k)``,
i.e. ``high(t_{k-1})``. :meth:`CheckpointSchedule.arrival_bands` exposes
exactly those effective constraints; the propagators and oracles use them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _as_times(values, what):
    arr = np.asarray(list(values), dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{what} must be a flat sequence of times")
    if arr.size:
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError(f"{what} must lie in [0, 1]")
        if np.any(np.diff(arr) < 0):
            raise ValueError(f"{what} must be sorted non-decreasing")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BoundaryPair:
    """Lower/upper step boundaries for a counting path of intensity ``n``.

    ``upper_initial_cap`` may be negative, in which case every probability is
    exactly zero. Caps above ``n`` are allowed and inert for ECDF queries.
    """

    n: int
    lower_crossings: np.ndarray = field(default_factory=lambda: np.empty(0))
    upper_initial_cap: int = 0
    upper_crossings: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if int(self.upper_initial_cap) != self.upper_initial_cap:
            raise ValueError("upper_initial_cap must be an integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "upper_initial_cap", int(self.upper_initial_cap))
        object.__setattr__(self, "lower_crossings", _as_times(self.lower_crossings, "lower crossings"))
        object.__setattr__(self, "upper_crossings", _as_times(self.upper_crossings, "upper crossings"))

    @classmethod
    def unconstrained(cls, n, cap=None):
        """No lower boundary, cap fixed at ``cap`` (default ``n``)."""
        return cls(n, [], n if cap is None else cap, [])

    def low(self, t):
        return int(np.searchsorted(self.lower_crossings, t, side="right"))

    def high(self, t):
        return self.upper_initial_cap + int(np.searchsorted(self.upper_crossings, t, side="right"))

    def with_n(self, n):
        return BoundaryPair(n, self.lower_crossings, self.upper_initial_cap, self.upper_crossings)

    @classmethod
    def from_schedule(cls, n, schedule: CheckpointSchedule) -> BoundaryPair:
        """Rebuild crossing lists that compile back to ``schedule``."""
        lower, upper = [], []
        prev_lo, prev_hi = 0, schedule.initial_cap
        for t, lo, hi in zip(schedule.times, schedule.lo, schedule.hi):
            lower.extend([t] * int(lo - prev_lo))
            upper.extend([t] * int(hi - prev_hi))
            prev_lo, prev_hi = lo, hi
        return cls(n, lower, schedule.initial_cap, upper)

    # --- text format ----------------------------------------------------------

    @classmethod
    def parse(cls, text):
        """Parse the four-line boundary format (``#`` lines are comments).

        Line 1 is ``n``, line 2 the lower crossing times (may be blank),
        line 3 the upper initial cap, line 4 the upper crossing times.
        """
        lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
        while len(lines) < 4:
            lines.append("")
        if any(ln.strip() for ln in lines[4:]):
            raise ValueError("boundary file has more than four data lines")
        try:
            n = int(lines[0].strip())
            cap = int(lines[2].strip())
            lower = [float(tok) for tok in lines[1].split()]
            upper = [float(tok) for tok in lines[3].split()]
        except ValueError as exc:
            raise ValueError(f"malformed boundary file: {exc}") from None
        return cls(n, lower, cap, upper)

    @classmethod
    def load(cls, path):
        return cls.parse(Path(path).read_text())

    def dumps(self):
        return "\n".join(
            [
                str(self.n),
                " ".join(repr(float(t)) for t in self.lower_crossings),
                str(self.upper_initial_cap),
                " ".join(repr(float(t)) for t in self.upper_crossings),
            ]
        ) + "\n"


@dataclass(frozen=True)
class CheckpointSchedule:
    """Sorted checkpoint times ending at 1 with the boundary band at each.

    ``lo[k]``/``hi[k]`` are ``low(times[k])``/``high(times[k])``; an empty band
    has ``lo > hi``. ``initial_cap`` is the cap in force from time 0 until the
    first upper crossing.
    """

    times: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    initial_cap: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.size == 0 or times[-1] != 1.0 or np.any(np.diff(times) <= 0):
            raise ValueError("checkpoint times must be strictly increasing and end at 1")
        if times[0] < 0:
            raise ValueError("checkpoint times must lie in [0, 1]")
        for name in ("lo", "hi"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.shape != times.shape:
                raise ValueError(f"{name} must have one entry per checkpoint")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "initial_cap", int(self.initial_cap))

    def __len__(self):
        return self.times.size

    @property
    def bands(self):
        return [(int(a), int(b)) for a, b in zip(self.lo, self.hi)]

    def arrival_bands(self):
        """Effective constraint on ``xi(t_k)`` for a path arriving at ``t_k``.

        Lower edge is ``low(t_k)``; upper edge is the cap that held just before
        ``t_k``. Returns two int arrays.
        """
        prev_hi = np.empty_like(self.hi)
        prev_hi[0] = self.initial_cap
        prev_hi[1:] = self.hi[:-1]
        return self.lo.copy(), np.minimum(prev_hi, self.hi)

    def has_empty_band(self):
        lo, hi = self.arrival_bands()
        return self.initial_cap < 0 or bool(np.any(lo > hi))

    def band_at(self, t):
        """Band implied by the step boundaries at an arbitrary time ``t``."""
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        if k < 0:
            return 0, self.initial_cap
        return int(self.lo[k]), int(self.hi[k])

    def refine(self, extra_times):
        """Insert checkpoints carrying the band the step boundaries imply there."""
        extra = np.setdiff1d(np.asarray(extra_times, dtype=float), self.times)
        if extra.size == 0:
            return self
        bands = [self.band_at(t) for t in extra]
        times = np.concatenate([self.times, extra])
        lo = np.concatenate([self.lo, [b[0] for b in bands]])
        hi = np.concatenate([self.hi, [b[1] for b in bands]])
        order = np.argsort(times, kind="stable")
        return CheckpointSchedule(times[order], lo[order], hi[order], self.initial_cap)


def compile_schedule(bp: BoundaryPair, cap=None) -> CheckpointSchedule:
    """Merge the crossing times of ``bp`` (plus 1.0) into a checkpoint schedule.

    Duplicate times collapse into one checkpoint; deduplication uses exact
    float equality. ``cap`` (e.g. ``n`` for ECDF queries) clips every upper
    band edge, including the initial one.
    """
    times = np.union1d(np.union1d(bp.lower_crossings, bp.upper_crossings), [1.0])
    lo = np.searchsorted(bp.lower_crossings, times, side="right")
    hi = bp.upper_initial_cap + np.searchsorted(bp.upper_crossings, times, side="right")
    initial = bp.upper_initial_cap
    if cap is not None:
        hi = np.minimum(hi, cap)
        initial = min(initial, cap)
    return CheckpointSchedule(times, lo, hi, initial)


def band_width_profile(schedule: CheckpointSchedule):
    """Number of admissible states per checkpoint (0 for an empty band)."""
    return [max(0, int(b) - int(a) + 1) for a, b in zip(schedule.lo, schedule.hi)]


__all__ = [
    "BoundaryPair",
    "CheckpointSchedule",
    "compile_schedule",
    "band_width_profile",
]
