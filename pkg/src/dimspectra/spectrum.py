"""Dimension spectra via the pressure curve b(a) and its Legendre transform.

b(a) is the unique root in b of P(a log|T'| + b phi) = 0 for a strictly
negative normalized potential phi.  Strict negativity makes the pressure
strictly decreasing in b, so roots of the certified lower/upper pressure
curves enclose b(a), while the partition-ratio root supplies the fast value
estimate (same pattern as the Bowen root).

On parabolic maps b(a) hits an affine ray: once a <= -dim(Lambda) the pure
geometric pressure already vanishes and b(a) = 0 identically.  Points on the
ray get the one-sided enclosure [0, U_n / (-sup phi)] coming from the
Lipschitz bound |dP/db| >= -sup phi.

The local dimension spectrum is the Legendre-type transform

    f(alpha) = inf_a (alpha * b(a) - a),

with alpha range endpoints equal to the extreme cycle-mean ratios of
(-phi-sums)/(log|T'|-sums) on the word digraph, found by Lawler's bisection
with a Bellman-Ford negative-cycle test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DerivativeUnstable,
    NoParabolicOrbit,
    NotConverged,
    NotStrictlyNegative,
)
from .maps import MarkovMap
from .numerics import (
    AitkenAccelerator,
    bisect_root,
    expand_to_sign_change,
    golden_section_min,
    log_sum_exp,
)
from .pressure import bowen_root, gluing_length, potential_floor
from .symbolic import CylinderTable, Potential, shared_table, words_at_level


@dataclass(frozen=True)
class BPoint:
    """One point of the b(a) curve with its certified enclosure."""

    a: float
    b: float
    lower: float
    upper: float
    level: int
    on_ray: bool

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class AlphaPoint:
    """Local dimension alpha(a) = 1/b'(a) from central differences."""

    a: float
    alpha: float
    b_prime: float
    spread: float  # disagreement between the two finite-difference steps


@dataclass(frozen=True)
class SpectrumCurve:
    """Sampled Legendre spectrum f(alpha) with per-point minimizer data."""

    alphas: tuple[float, ...]
    f_values: tuple[float, ...]
    f_lowers: tuple[float, ...]  # alpha*b_lo(a*) - a*
    f_uppers: tuple[float, ...]  # certified upper bounds alpha*b_hi(a*) - a*
    a_minimizers: tuple[float, ...]
    b_at_minimizers: tuple[float, ...]
    b_lowers: tuple[float, ...]
    b_uppers: tuple[float, ...]
    alpha_min: float
    alpha_max: float

    def as_rows(self) -> list[tuple[float, ...]]:
        return [
            (al, f, flo, fu, a, b, blo, bhi)
            for al, f, flo, fu, a, b, blo, bhi in zip(
                self.alphas, self.f_values, self.f_lowers, self.f_uppers,
                self.a_minimizers, self.b_at_minimizers,
                self.b_lowers, self.b_uppers,
            )
        ]


def _require_negative(m: MarkovMap, phi: Potential) -> float:
    sup = phi.bounds(m)[1]
    if sup >= 0.0:
        raise NotStrictlyNegative(
            f"spectrum potential must be strictly negative; sup is {sup:.6g}"
        )
    return sup


def _ray_threshold(m: MarkovMap, *, tol: float, max_level: int) -> float:
    """a-value at which b(a) reaches 0 on a parabolic map: a = -dim(Lambda)."""
    root = bowen_root(m, tol=tol, max_level=max_level)
    return -root.value


def _descending_root(fn, guess: float, *, xtol: float) -> float:
    """Root of a strictly decreasing scalar function, expanding from a guess."""
    f0 = fn(guess)
    if f0 == 0.0:
        return guess
    lo, hi = expand_to_sign_change(fn, guess, 1.0 if f0 > 0.0 else -1.0, max_expand=60)
    return bisect_root(fn, lo, hi, xtol=xtol)


def b_of_a(
    m: MarkovMap,
    phi: Potential,
    a: float,
    *,
    tol: float = 1e-8,
    max_level: int = 24,
    threads: int | None = None,
    _ray_at: float | None = None,
) -> BPoint:
    """Root in b of P(a log|T'| + b phi) = 0 with certified enclosure.

    Args:
        m: the Markov map.
        phi: strictly negative normalized potential.
        a: coefficient on log|T'|.
        tol: stop when the enclosure width or the ratio Cauchy gap is below.
        max_level: cylinder depth cap for the ladder.

    Raises:
        NotStrictlyNegative: sup phi >= 0.
        NotConverged: neither criterion met by max_level (enclosure rides).
    """
    sup_phi = _require_negative(m, phi)
    table = shared_table(m, phi)
    if m.has_parabolic:
        ray_at = _ray_at if _ray_at is not None else _ray_threshold(
            m, tol=tol, max_level=max_level
        )
        if a <= ray_at + 1e-12:
            n = min(10, max_level)
            arr = table.level(n)
            f_lo, f_hi = arr.combined(a, 0.0)
            upper_pressure = max(log_sum_exp(f_hi, threads) / n, 0.0)
            return BPoint(
                a=a,
                b=0.0,
                lower=0.0,
                upper=upper_pressure / -sup_phi,
                level=n,
                on_ray=True,
            )
    k = gluing_length(m)
    floor_cache: dict[float, float] = {}
    best_lo, best_hi = -math.inf, math.inf
    value = math.nan
    value_prev: float | None = None
    accel = AitkenAccelerator()
    est_prev: float | None = None
    est = math.nan
    guess = 0.0
    for n in range(2, max_level + 1):
        arr = table.level(n)
        prev = table.level(n - 1)

        def lower_curve(b: float) -> float:
            if b not in floor_cache:
                floor_cache[b] = potential_floor(table, a, b)
            f_lo, _ = arr.combined(a, b)
            return (log_sum_exp(f_lo, threads) + k * floor_cache[b]) / (n + k)

        def upper_curve(b: float) -> float:
            _, f_hi = arr.combined(a, b)
            return log_sum_exp(f_hi, threads) / n

        def ratio_curve(b: float) -> float:
            _, f_hi = arr.combined(a, b)
            _, g_hi = prev.combined(a, b)
            return log_sum_exp(f_hi, threads) - log_sum_exp(g_hi, threads)

        # Pressure is strictly decreasing in b, so all three curves cross
        # zero exactly once; roots of lower/upper bound the true b(a).
        best_lo = max(best_lo, _descending_root(lower_curve, guess, xtol=1e-13))
        best_hi = min(best_hi, _descending_root(upper_curve, guess, xtol=1e-13))
        value = _descending_root(ratio_curve, guess, xtol=1e-14)
        guess = value
        est = accel.push(value)
        if best_hi - best_lo <= tol:
            mid = min(max(est, best_lo), best_hi)
            return BPoint(a, mid, best_lo, best_hi, n, False)
        raw_ok = value_prev is not None and abs(value - value_prev) <= tol
        acc_ok = est_prev is not None and abs(est - est_prev) <= tol
        if raw_ok or acc_ok:
            mid = min(max(est, best_lo), best_hi)
            return BPoint(a, mid, best_lo, best_hi, n, False)
        value_prev, est_prev = value, est
    raise NotConverged(
        f"b({a:g}) not within {tol:g} by level {max_level}; "
        f"enclosure [{best_lo:.12g}, {best_hi:.12g}], last value {est:.12g}",
        enclosure=(best_lo, best_hi),
    )


def b_curve(
    m: MarkovMap,
    phi: Potential,
    a_values: list[float] | tuple[float, ...] | np.ndarray,
    *,
    tol: float = 1e-8,
    max_level: int = 24,
    threads: int | None = None,
) -> list[BPoint]:
    """b(a) sampled over a list of a-values (shared tables, shared ray test)."""
    ray_at = None
    if m.has_parabolic:
        ray_at = _ray_threshold(m, tol=tol, max_level=max_level)
    return [
        b_of_a(
            m, phi, float(a),
            tol=tol, max_level=max_level, threads=threads, _ray_at=ray_at,
        )
        for a in a_values
    ]


def alpha_of_a(
    m: MarkovMap,
    phi: Potential,
    a: float,
    *,
    step: float = 1e-3,
    tol: float = 1e-10,
    max_level: int = 24,
    threads: int | None = None,
) -> AlphaPoint:
    """alpha(a) = 1/b'(a) by central differences at two step sizes.

    The two-step spread is the consistency check: if the h and h/2 estimates
    disagree beyond 1% relative (or 1e-6 absolute), the derivative is deemed
    unreliable.

    Raises:
        DerivativeUnstable: inconsistent or nonpositive slope estimates.
    """
    ray_at = _ray_threshold(m, tol=1e-8, max_level=max_level) if m.has_parabolic else None

    def b_at(x: float) -> BPoint:
        return b_of_a(
            m, phi, x, tol=tol, max_level=max_level, threads=threads, _ray_at=ray_at
        )

    points = {x: b_at(x) for x in (a - step, a + step, a - step / 2, a + step / 2)}
    if all(pt.on_ray for pt in points.values()):
        return AlphaPoint(a=a, alpha=math.inf, b_prime=0.0, spread=0.0)
    d1 = (points[a + step].b - points[a - step].b) / (2 * step)
    d2 = (points[a + step / 2].b - points[a - step / 2].b) / step
    spread = abs(d1 - d2)
    if spread > max(0.01 * abs(d2), 1e-6):
        raise DerivativeUnstable(
            f"slope estimates {d1:.9g} and {d2:.9g} disagree at a = {a:g}"
        )
    slope = (4.0 * d2 - d1) / 3.0  # Richardson step removes the h^2 term
    if slope <= 0.0:
        raise DerivativeUnstable(f"slope {slope:.9g} <= 0 at a = {a:g}")
    return AlphaPoint(a=a, alpha=1.0 / slope, b_prime=slope, spread=spread)


# ---------------------------------------------------------------------------
# alpha range from extreme cycle-mean ratios


def _edge_graph(
    m: MarkovMap, table: CylinderTable, n: int
) -> tuple[
    int,
    np.ndarray,
    np.ndarray,
    tuple[np.ndarray, np.ndarray],
    tuple[np.ndarray, np.ndarray],
]:
    """Word digraph at level n: nodes are (n-1)-words, edges are n-words.

    Returns (node_count, tails, heads, (num_lo, num_hi), (den_lo, den_hi));
    numerators and denominators are the per-edge Birkhoff brackets of -phi
    and log|T'|.
    """
    prefix_index = {w: i for i, w in enumerate(words_at_level(m, n - 1))}
    arr = table.level(n)
    words = list(words_at_level(m, n))
    tails = np.empty(len(words), dtype=np.int64)
    heads = np.empty(len(words), dtype=np.int64)
    for r, w in enumerate(words):
        tails[r] = prefix_index[w[:-1]]
        heads[r] = prefix_index[w[1:]]
    num_lo, num_hi = -arr.phi_hi, -arr.phi_lo
    den_lo, den_hi = arr.psi_lo.copy(), arr.psi_hi.copy()
    return len(prefix_index), tails, heads, (num_lo, num_hi), (den_lo, den_hi)


def _has_negative_cycle(
    nodes: int, tails: np.ndarray, heads: np.ndarray, w: np.ndarray
) -> bool:
    """Bellman-Ford negative-cycle test (vectorized edge relaxation).

    Relaxing all edges `nodes` times without reaching a fixed point proves a
    negative cycle; early fixed point proves there is none.
    """
    dist = np.zeros(nodes)
    for _ in range(nodes):
        new = dist.copy()
        np.minimum.at(new, heads, dist[tails] + w)
        if np.array_equal(new, dist):
            return False
        dist = new
    return True


def _min_cycle_ratio(
    nodes: int,
    tails: np.ndarray,
    heads: np.ndarray,
    num: np.ndarray,
    den: np.ndarray,
    *,
    xtol: float = 1e-11,
) -> float:
    """Minimum of sum(num)/sum(den) over directed cycles, den >= 0.

    Cycles with zero total denominator have +inf ratio and never produce a
    negative cycle of num - lambda*den, so they exclude themselves.  Lawler
    bisection: ratio(lambda) feasible iff some cycle has num - lambda*den < 0.
    """
    finite = den > 0
    if not np.any(finite):
        return math.inf
    lo = float(np.min(num[finite] / den[finite])) - 1e-9
    hi = float(np.max(num[finite] / den[finite])) + 1e-9
    if _has_negative_cycle(nodes, tails, heads, num - lo * den):
        return lo  # should not happen: lo is below every edge ratio
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol * max(1.0, abs(lo), abs(hi)) or mid in (lo, hi):
            break
        if _has_negative_cycle(nodes, tails, heads, num - mid * den):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def spectrum_endpoints(
    m: MarkovMap,
    phi: Potential,
    *,
    level: int = 8,
) -> tuple[float, float, tuple[float, float], tuple[float, float]]:
    """(alpha_min, alpha_max) as extreme cycle-mean ratios, with enclosures.

    alpha_max is +inf exactly when the map has a parabolic orbit (Birkhoff
    ratios along orbits approaching it diverge).  Enclosures come from
    rerunning Lawler's bisection on the outer bracket combinations.

    Returns:
        (alpha_min, alpha_max, (alpha_min_lo, alpha_min_hi),
         (alpha_max_lo, alpha_max_hi))
    """
    _require_negative(m, phi)
    table = shared_table(m, phi)
    nodes, tails, heads, (num_lo, num_hi), (den_lo, den_hi) = _edge_graph(
        m, table, level
    )
    mid_num = 0.5 * (num_lo + num_hi)
    mid_den = 0.5 * (den_lo + den_hi)
    a_min = _min_cycle_ratio(nodes, tails, heads, mid_num, mid_den)
    # Outer bracket: smaller numerators with larger denominators, and back.
    a_min_lo = _min_cycle_ratio(nodes, tails, heads, num_lo, den_hi)
    a_min_hi = _min_cycle_ratio(nodes, tails, heads, num_hi, den_lo)
    if m.has_parabolic:
        return a_min, math.inf, (a_min_lo, a_min_hi), (math.inf, math.inf)
    a_max = -_min_cycle_ratio(nodes, tails, heads, -mid_num, mid_den)
    a_max_lo = -_min_cycle_ratio(nodes, tails, heads, -num_lo, den_hi)
    a_max_hi = -_min_cycle_ratio(nodes, tails, heads, -num_hi, den_lo)
    return (
        a_min,
        a_max,
        (a_min_lo, a_min_hi),
        (min(a_max_lo, a_max_hi), max(a_max_lo, a_max_hi)),
    )


def dimension_at_infinite_alpha(
    m: MarkovMap,
    *,
    tol: float = 1e-6,
    max_level: int = 22,
) -> float:
    """Constant tail value of f(alpha) as alpha -> inf on a parabolic map.

    The tail equals dim(Lambda): on the ray the Legendre objective is -a,
    minimized at the ray onset a = -dim(Lambda).

    Raises:
        NoParabolicOrbit: the map is uniformly expanding, so alpha_max is
            finite and there is no tail.
    """
    if not m.has_parabolic:
        raise NoParabolicOrbit("finite alpha_max: spectrum has no infinite tail")
    return bowen_root(m, tol=tol, max_level=max_level).value


# ---------------------------------------------------------------------------
# Legendre transform


def legendre_spectrum(
    m: MarkovMap,
    phi: Potential,
    alphas: list[float] | tuple[float, ...] | np.ndarray,
    *,
    a_lo: float = -4.0,
    a_hi: float = 4.0,
    tol: float = 1e-8,
    max_level: int = 24,
    refine_tol: float = 1e-7,
    threads: int | None = None,
) -> SpectrumCurve:
    """f(alpha) = inf_a (alpha*b(a) - a) over a sampled alpha grid.

    The objective is convex in a (b is convex; the ray keeps it so), so each
    alpha is minimized by golden-section search, with the initial [a_lo, a_hi]
    bracket widened automatically while the minimizer sits on its edge.

    Values outside the admissible alpha range come out negative; they are
    reported as computed (no clamping), matching the convention f < 0 means
    "no points with that local dimension".
    """
    _require_negative(m, phi)
    ray_at = _ray_threshold(m, tol=tol, max_level=max_level) if m.has_parabolic else None
    cache: dict[float, BPoint] = {}

    def bp(a: float) -> BPoint:
        key = round(a, 12)
        if key not in cache:
            cache[key] = b_of_a(
                m, phi, key, tol=tol, max_level=max_level,
                threads=threads, _ray_at=ray_at,
            )
        return cache[key]

    f_vals: list[float] = []
    f_los: list[float] = []
    f_ups: list[float] = []
    a_mins: list[float] = []
    b_mins: list[float] = []
    b_los: list[float] = []
    b_his: list[float] = []
    for alpha in np.asarray(alphas, dtype=float):
        lo, hi = a_lo, a_hi

        def objective(a: float) -> float:
            return alpha * bp(a).b - a

        for _ in range(8):  # widen while the minimizer presses the bracket
            a_star, f_star = golden_section_min(objective, lo, hi, xtol=refine_tol)
            span = hi - lo
            if a_star - lo < 0.02 * span:
                lo -= span
            elif hi - a_star < 0.02 * span:
                hi += span
            else:
                break
        point = bp(a_star)
        f_vals.append(f_star)
        f_los.append(alpha * point.lower - a_star)
        f_ups.append(alpha * point.upper - a_star)
        a_mins.append(a_star)
        b_mins.append(point.b)
        b_los.append(point.lower)
        b_his.append(point.upper)
    amin, amax, _, _ = spectrum_endpoints(m, phi)
    return SpectrumCurve(
        alphas=tuple(float(x) for x in alphas),
        f_values=tuple(f_vals),
        f_lowers=tuple(f_los),
        f_uppers=tuple(f_ups),
        a_minimizers=tuple(a_mins),
        b_at_minimizers=tuple(b_mins),
        b_lowers=tuple(b_los),
        b_uppers=tuple(b_his),
        alpha_min=amin,
        alpha_max=amax,
    )
