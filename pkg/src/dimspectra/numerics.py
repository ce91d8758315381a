"""Low-level numeric helpers: compensated sums, log-sum-exp, root finding.

All reductions here are deterministic: chunk boundaries are fixed by array
length (never by thread count), within-chunk sums use numpy's pairwise
reduction, and cross-chunk combination is sequential and compensated.
Repeated runs on the same machine therefore produce identical bits.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

# Fixed chunk size for log-sum-exp reductions.  Determinism requires this to
# be a constant of the build, never derived from the thread count.
_CHUNK = 1 << 15

_THREAD_ENV = "DIMSPECTRA_THREADS"


def thread_count() -> int:
    """Worker threads for chunked reductions, from DIMSPECTRA_THREADS (default 1)."""
    raw = os.environ.get(_THREAD_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{_THREAD_ENV} must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"{_THREAD_ENV} must be >= 1, got {n}")
    return n


class NeumaierSum:
    """Running compensated sum (Neumaier's variant of Kahan summation)."""

    __slots__ = ("_sum", "_comp")

    def __init__(self) -> None:
        self._sum = 0.0
        self._comp = 0.0

    def add(self, value: float) -> None:
        t = self._sum + value
        if abs(self._sum) >= abs(value):
            self._comp += (self._sum - t) + value
        else:
            self._comp += (value - t) + self._sum
        self._sum = t

    @property
    def value(self) -> float:
        return self._sum + self._comp


def log_sum_exp(values: np.ndarray, threads: int | None = None) -> float:
    """log(sum(exp(values))) with max shifting, safe against overflow.

    Args:
        values: 1-d float array; -inf entries contribute zero mass.
        threads: worker threads for per-chunk partial sums; the reduction
            result does not depend on this value.

    Returns:
        The log-sum, or -inf for an empty / all -inf input.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return -math.inf
    m = float(np.max(values))
    if not math.isfinite(m):
        if m == -math.inf:
            return -math.inf
        raise ValueError("log_sum_exp received a non-finite (nan or +inf) entry")
    chunks = [values[i : i + _CHUNK] for i in range(0, values.size, _CHUNK)]

    def partial(chunk: np.ndarray) -> float:
        return float(np.sum(np.exp(chunk - m)))

    if threads is None:
        threads = thread_count()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(partial, chunks))
    else:
        parts = [partial(c) for c in chunks]
    acc = NeumaierSum()
    for p in parts:  # sequential, in chunk order: deterministic
        acc.add(p)
    return m + math.log(acc.value)


def log_sum_exp_pair(a: float, b: float) -> float:
    """log(exp(a) + exp(b)) for scalars."""
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


class AitkenAccelerator:
    """Repeated Aitken delta-squared extrapolation of a scalar sequence.

    One round collapses a geometric error mode; parabolic ladders carry a
    slower secondary mode, so `depth` rounds are chained (each round feeds
    the next one's input).  Degenerate differences fall back to the raw
    value, so exact sequences pass through unchanged.
    """

    __slots__ = ("_values", "_next")

    def __init__(self, depth: int = 2) -> None:
        self._values: list[float] = []
        self._next = AitkenAccelerator(depth - 1) if depth > 1 else None

    def push(self, value: float) -> float:
        """Record the next raw value; return the best current estimate."""
        self._values.append(value)
        if len(self._values) < 3:
            return value
        v0, v1, v2 = self._values[-3:]
        d1, d2 = v1 - v0, v2 - v1
        den = d2 - d1
        if abs(den) <= 1e-14 * max(1.0, abs(v2)):
            est = v2
        else:
            est = v2 - d2 * d2 / den
        return self._next.push(est) if self._next is not None else est


def bisect_root(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Root of a continuous function by plain bisection.

    Args:
        fn: function with fn(lo) and fn(hi) of opposite (weak) sign.
        lo, hi: bracket endpoints, lo < hi.
        xtol: terminate when the bracket is narrower than this.
        max_iter: hard iteration cap.

    Returns:
        Bracket midpoint after refinement.

    Raises:
        ValueError: if the initial values do not bracket a sign change.
    """
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid == lo or mid == hi:
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


def expand_to_sign_change(
    fn: Callable[[float], float],
    start: float,
    step: float,
    *,
    max_expand: int = 64,
) -> tuple[float, float]:
    """Walk geometrically from `start` until fn changes sign.

    Returns (lo, hi) with fn(lo) and fn(hi) of opposite sign.  The step
    doubles each miss; direction is the sign of `step`.
    """
    f0 = fn(start)
    if f0 == 0.0:
        return start, start
    x = start
    for _ in range(max_expand):
        x_next = x + step
        f_next = fn(x_next)
        if f_next == 0.0 or (f_next > 0.0) != (f0 > 0.0):
            return (x, x_next) if x < x_next else (x_next, x)
        x = x_next
        step *= 2.0
    raise ValueError("no sign change found while expanding bracket")


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-6,
    max_iter: int = 120,
) -> tuple[float, float]:
    """Minimum of a unimodal function on [lo, hi] by golden-section search.

    Returns (argmin, min value).  Deterministic; no randomization.
    """
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = fn(d)
    if fc <= fd:
        return c, fc
    return d, fd


def format_float(x: float) -> str:
    """Canonical decimal rendering: 17 significant digits, inf/nan literals."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def pairwise_interval_sum(intervals: Iterable[tuple[float, float]]) -> tuple[float, float]:
    """Sum of closed intervals, endpoints accumulated with compensation."""
    lo = NeumaierSum()
    hi = NeumaierSum()
    for a, b in intervals:
        lo.add(a)
        hi.add(b)
    return lo.value, hi.value


def weighted_mean(weights: Sequence[float], values: Sequence[float]) -> float:
    """Compensated dot product / sum(weights); weights must sum to ~1."""
    acc = NeumaierSum()
    for w, v in zip(weights, values):
        acc.add(w * v)
    return acc.value
