"""Truncated linear convolution of scaled probability vectors with Poisson kernels.

Vectors carry a natural-log scale factor so that values stay near one while
the probabilities they represent may be far below the double range. The
FFT route zero-pads both operands past their combined support, multiplies
real-input spectra and transforms back, which is the circular convolution
theorem applied to a linear convolution. Narrow operands go through a direct
double sum instead.

Transform plans are cached per length by ``scipy.fft`` (pocketfft keeps an
internal, thread-safe LRU of twiddle tables), so repeated steps with the
same padded size reuse them.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .errors import NumericalFailure
from .special import poisson_logpmf

DEFAULT_CROSSOVER = 64
NEGATIVE_TOLERANCE = 1e-10
# below this fraction of the product scale the FFT band is recomputed directly
FFT_GUARD = 1e-3


def fft_crossover():
    """Operand width at or below which the direct sum is used."""
    env = os.environ.get("CROSSPROB_FFT_CROSSOVER")
    if env is None or not env.strip():
        return DEFAULT_CROSSOVER
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"CROSSPROB_FFT_CROSSOVER must be an integer, got {env!r}") from None


@lru_cache(maxsize=4096)
def transform_size(min_length):
    return scipy.fft.next_fast_len(int(min_length), real=True)


@dataclass
class ScaledProbVector:
    """Probabilities ``values[m - offset] * exp(log_scale)`` for states from ``offset``."""

    offset: int
    values: np.ndarray
    log_scale: float = 0.0

    @property
    def top(self):
        """Largest state index represented."""
        return self.offset + self.values.size - 1

    @property
    def is_zero(self):
        return self.values.size == 0 or not np.any(self.values)

    def log_prob(self, m):
        if m < self.offset or m > self.top:
            return -math.inf
        v = self.values[m - self.offset]
        return math.log(v) + self.log_scale if v > 0 else -math.inf

    def log_total(self):
        s = float(self.values.sum())
        return math.log(s) + self.log_scale if s > 0 else -math.inf

    def probabilities(self):
        """Reconstructed probabilities (may underflow to zero)."""
        if self.is_zero:
            return np.zeros_like(self.values)
        with np.errstate(divide="ignore"):
            return np.exp(np.log(self.values) + self.log_scale)

    @classmethod
    def point_mass(cls, state=0):
        return cls(state, np.ones(1), 0.0)

    @classmethod
    def zero(cls, offset=0):
        return cls(offset, np.zeros(0), -math.inf)


@dataclass
class PoissonKernel:
    """Poisson(lam) point masses ``values[k - offset] * exp(log_scale)``."""

    lam: float
    values: np.ndarray
    log_scale: float = 0.0
    offset: int = 0

    @property
    def top(self):
        return self.offset + self.values.size - 1


def poisson_kernel(lam, length, start=0):
    """Poisson(lam) pmf at k = start, ..., start + length - 1.

    The scale is seeded in log domain at the mode (clipped into the
    requested range) and filled outward with the ratio recurrence
    ``p[k+1] = p[k] * lam / (k + 1)``. The seeded entry equals one, so no
    entry overflows and ``exp(-lam)`` underflow cannot wipe out the kernel
    for large ``lam``. Entries more than ~e^-745 below the seed are dropped
    from the upper end since they are zero in double precision anyway.
    """
    lam = float(lam)
    if lam < 0 or not math.isfinite(lam):
        raise ValueError("Poisson intensity must be finite and non-negative")
    length = int(length)
    start = int(start)
    if length < 1 or start < 0:
        raise ValueError("kernel needs length >= 1 and start >= 0")
    if lam == 0.0:
        values = np.zeros(length)
        if start == 0:
            values[0] = 1.0
            return PoissonKernel(lam, values, 0.0, 0)
        return PoissonKernel(lam, values, -math.inf, start)

    stop = start + length - 1
    seed = min(max(int(math.floor(lam)), start), stop)
    # log(p[seed+j] / p[seed]) <= -j(j-1) / (2(lam+j)); past this reach it is below -745
    reach = int(math.ceil((1491.0 + math.sqrt(1491.0**2 + 5960.0 * lam)) / 2.0))
    eff_stop = min(stop, seed + reach)
    values = np.zeros(length)
    up = np.arange(seed + 1, eff_stop + 1, dtype=float)
    if up.size:
        values[seed + 1 - start : eff_stop + 1 - start] = np.cumprod(lam / up)
    values[seed - start] = 1.0
    down = np.arange(seed, start, -1, dtype=float)
    if down.size:
        values[seed - 1 - start :: -1][: down.size] = np.cumprod(down / lam)
    return PoissonKernel(lam, values, poisson_logpmf(seed, lam), start)


def renormalize(q: ScaledProbVector) -> ScaledProbVector:
    """Divide by the maximum, folding its log into ``log_scale``.

    An all-zero vector comes back with ``log_scale = -inf`` (``is_zero``).
    """
    if q.values.size == 0:
        return ScaledProbVector(q.offset, q.values, -math.inf)
    if not np.all(np.isfinite(q.values)):
        raise NumericalFailure("non-finite entries in probability vector")
    peak = float(q.values.max())
    if peak <= 0.0:
        return ScaledProbVector(q.offset, np.zeros_like(q.values), -math.inf)
    if 0.5 <= peak <= 2.0:
        return q
    return ScaledProbVector(q.offset, q.values / peak, q.log_scale + math.log(peak))


def kernel_range(q: ScaledProbVector, out_lo, out_hi):
    """Kernel indices ``[k_lo, k_hi]`` that feed states ``[out_lo, out_hi]``."""
    return max(0, out_lo - q.top), out_hi - q.offset


def truncated_convolve(q: ScaledProbVector, kernel: PoissonKernel, out_band, *,
                       method="auto", crossover=None, full_length=None) -> ScaledProbVector:
    """Entries ``r[m] = sum_l q[l] * kernel[m - l]`` for ``m`` in ``out_band``.

    ``out_band`` is an inclusive ``(lo, hi)`` pair of states and the kernel
    must cover every index that can reach it. ``method`` is ``"fft"``,
    ``"direct"`` or ``"auto"`` (direct when either operand is at most
    ``crossover`` entries wide). With ``full_length`` set, both operands are
    embedded at absolute positions in arrays of that length and convolved
    in full, ignoring the band, as a fixed-size reference. The result is
    renormalized.
    """
    out_lo, out_hi = int(out_band[0]), int(out_band[1])
    if out_lo < q.offset:
        raise ValueError("output band starts below the input offset; states cannot decrease")
    if method not in ("auto", "fft", "direct"):
        raise ValueError(f"unknown convolution method {method!r}")
    if q.is_zero or math.isinf(kernel.log_scale) or out_lo > out_hi:
        return ScaledProbVector.zero(out_lo)
    if not (np.all(np.isfinite(q.values)) and np.all(np.isfinite(kernel.values))):
        raise ValueError("non-finite input to convolution")
    k_lo, k_hi = kernel_range(q, out_lo, out_hi)
    if kernel.offset > k_lo or kernel.top < k_hi:
        raise ValueError(f"kernel covers [{kernel.offset}, {kernel.top}], band needs [{k_lo}, {k_hi}]")

    # inputs above out_hi cannot reach the band
    qv = q.values[: out_hi - q.offset + 1]
    kv = kernel.values[k_lo - kernel.offset : k_hi - kernel.offset + 1]
    log_scale = q.log_scale + kernel.log_scale

    if full_length is not None:
        qv, kv = _embed(qv, q.offset, kv, k_lo, int(full_length), out_hi)
        c_lo, c_hi = out_lo, out_hi
    else:
        # linear index c = (l - q.offset) + (k - k_lo) lands on state c + q.offset + k_lo
        c_lo = out_lo - q.offset - k_lo
        c_hi = out_hi - q.offset - k_lo

    if method == "auto":
        if crossover is None:
            crossover = fft_crossover()
        method = "direct" if min(qv.size, kv.size) <= crossover else "fft"
    if method == "direct":
        raw = np.convolve(qv, kv)[c_lo : c_hi + 1]
        return renormalize(ScaledProbVector(out_lo, raw, log_scale))

    if full_length is not None:
        size = transform_size(2 * qv.size)
    else:
        # circular wrap only has to miss [c_lo, c_hi], not the whole linear support
        size = transform_size(qv.size + kv.size - 1 - c_lo)
    raw = fft_band(qv, kv, size, c_lo, c_hi)
    return renormalize(ScaledProbVector(out_lo, raw, log_scale))


def fft_band(qv, kv, size, c_lo, c_hi):
    """Entries ``c_lo..c_hi`` of ``convolve(qv, kv)`` through a length-``size`` real FFT.

    ``size`` must keep the circular wrap clear of ``[c_lo, c_hi]``. Output
    below the FFT noise floor is recomputed with a direct sum; small
    negative rounding is clipped to zero and large negatives raise.
    """
    spec = scipy.fft.rfft(qv, size)
    spec *= scipy.fft.rfft(kv, size)
    raw = scipy.fft.irfft(spec, size)[c_lo : c_hi + 1]
    # FFT rounding is absolute, on the scale of the largest single product
    ref = float(qv.max()) * float(kv.max())
    if raw.size and float(raw.min()) < -NEGATIVE_TOLERANCE * ref:
        raise NumericalFailure(
            f"convolution produced negative mass {float(raw.min()):.3e} against scale {ref:.3e}"
        )
    if float(raw.max()) < FFT_GUARD * ref:
        # whole band sits in the FFT noise floor; redo it exactly
        return np.convolve(qv, kv)[c_lo : c_hi + 1]
    return np.maximum(raw, 0.0, out=raw)


def _embed(qv, q_offset, kv, k_lo, length, out_hi):
    if out_hi >= length:
        raise ValueError("full-length arrays shorter than the state range")
    qa = np.zeros(length)
    qa[q_offset : q_offset + qv.size] = qv
    ka = np.zeros(length)
    ka[k_lo : k_lo + kv.size] = kv
    return qa, ka
