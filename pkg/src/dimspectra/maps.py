"""Markov interval maps built from monotone expanding branches.

A map is a finite family of analytic branches on closed subintervals of
[0, 1] together with a 0/1 transition matrix.  Branches may have parabolic
(derivative-one) periodic points; everything downstream distinguishes maps
with and without them.  Instances are immutable after construction and all
operations on them are pure, so they are safe to share across threads.

Supported branch families:

* ``linear``:             T(x) = slope * x + offset
* ``manneville_pomeau``:  T(x) = x + x**(1+s) - lift      (lift in Z)
* ``power``:              T(x) = x + c * x**(1+s) - lift  (lift in Z)
* ``farey_left``:         T(x) = x / (1 - x)
* ``farey_right``:        T(x) = (1 - x) / x

The integer lift of the power-law families is derived from the declared
image, so "mod 1" branches are written naturally.  Every family has a
monotone derivative on its domain; interval ranges of log|T'| are therefore
exact from endpoint evaluations, which the cylinder machinery relies on.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ContractionViolation,
    FitUnstable,
    MarkovViolation,
    NotTransitive,
    OutOfImage,
)

ENDPOINT_TOL = 1e-12
PARABOLIC_TOL = 1e-10

_FAMILIES = ("linear", "manneville_pomeau", "power", "farey_left", "farey_right")


@dataclass(frozen=True)
class Branch:
    """One monotone expanding branch T_i restricted to its domain.

    Args:
        family: one of the supported family tags.
        domain: closed interval [lo, hi] the branch is defined on.
        image: closed interval the branch maps its domain onto.
        slope, offset: linear family parameters.
        s: power-law exponent for manneville_pomeau / power.
        c: prefactor for the power family (manneville_pomeau fixes c = 1).

    The integer lift for power-law families is computed in __post_init__
    from the declared image and stored on the instance.
    """

    family: str
    domain: tuple[float, float]
    image: tuple[float, float]
    slope: float | None = None
    offset: float = 0.0
    s: float | None = None
    c: float | None = None
    lift: float = field(init=False, default=0.0)

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown branch family {self.family!r}")
        lo, hi = self.domain
        if not (lo < hi):
            raise ValueError(f"branch domain must be nondegenerate, got {self.domain}")
        ilo, ihi = self.image
        if not (ilo < ihi):
            raise ValueError(f"branch image must be nondegenerate, got {self.image}")
        if self.family == "linear":
            if self.slope is None or self.slope == 0.0:
                raise ValueError("linear branch requires a nonzero slope")
        elif self.family in ("manneville_pomeau", "power"):
            if self.s is None or self.s <= 0.0:
                raise ValueError("power-law branch requires s > 0")
            cc = 1.0 if self.family == "manneville_pomeau" else self.c
            if cc is None or cc <= 0.0:
                raise ValueError("power branch requires c > 0")
            if lo < 0.0:
                raise ValueError("power-law branch domain must lie in [0, inf)")
            object.__setattr__(self, "c", cc)
            # Integer lift so that the raw increasing formula lands on the image.
            raw_lo = lo + cc * lo ** (1.0 + self.s)
            object.__setattr__(self, "lift", float(round(raw_lo - ilo)))
        elif self.family == "farey_left":
            if hi >= 1.0:
                raise ValueError("farey_left domain must stay left of 1")
        elif self.family == "farey_right":
            if lo <= 0.0:
                raise ValueError("farey_right domain must stay right of 0")

    # -- orientation ------------------------------------------------------

    @property
    def increasing(self) -> bool:
        if self.family == "linear":
            return self.slope > 0.0
        return self.family != "farey_right"

    # -- forward map, derivative ------------------------------------------

    def value(self, x):
        """T_i(x); accepts scalars or arrays, no domain check."""
        x = np.asarray(x, dtype=float)
        if self.family == "linear":
            out = self.slope * x + self.offset
        elif self.family in ("manneville_pomeau", "power"):
            out = x + self.c * x ** (1.0 + self.s) - self.lift
        elif self.family == "farey_left":
            out = x / (1.0 - x)
        else:  # farey_right
            out = (1.0 - x) / x
        return out if out.ndim else float(out)

    def derivative(self, x):
        """T_i'(x); signed."""
        x = np.asarray(x, dtype=float)
        if self.family == "linear":
            out = np.full_like(x, self.slope)
        elif self.family in ("manneville_pomeau", "power"):
            out = 1.0 + self.c * (1.0 + self.s) * x**self.s
        elif self.family == "farey_left":
            out = (1.0 - x) ** -2.0
        else:
            out = -(x**-2.0)
        return out if out.ndim else float(out)

    def log_abs_derivative(self, x):
        """log|T_i'(x)|, clipped below at 0 only by the caller if needed."""
        x = np.asarray(x, dtype=float)
        if self.family == "linear":
            out = np.full_like(x, math.log(abs(self.slope)))
        elif self.family in ("manneville_pomeau", "power"):
            out = np.log1p(self.c * (1.0 + self.s) * x**self.s)
        elif self.family == "farey_left":
            out = -2.0 * np.log1p(-x)
        else:
            out = -2.0 * np.log(x)
        return out if out.ndim else float(out)

    def log_deriv_range(self, lo, hi):
        """Exact range of log|T'| on [lo, hi] (derivative is monotone per family)."""
        a = self.log_abs_derivative(lo)
        b = self.log_abs_derivative(hi)
        return np.minimum(a, b), np.maximum(a, b)

    # -- inverse ----------------------------------------------------------

    def inverse(self, y, *, clamp_tol: float = 1e-9):
        """Preimage under T_i, to absolute tolerance 1e-14.

        Args:
            y: point(s) in the branch image.
            clamp_tol: values this far outside the image are clamped to the
                image endpoint; anything farther raises OutOfImage.

        Raises:
            OutOfImage: if some y lies outside the image beyond clamp_tol.
        """
        y = np.asarray(y, dtype=float)
        ilo, ihi = self.image
        if float(np.min(y)) < ilo - clamp_tol or float(np.max(y)) > ihi + clamp_tol:
            raise OutOfImage(
                f"point outside branch image [{ilo}, {ihi}]: "
                f"range [{float(np.min(y))}, {float(np.max(y))}]"
            )
        y = np.clip(y, ilo, ihi)
        lo, hi = self.domain
        if self.family == "linear":
            out = (y - self.offset) / self.slope
        elif self.family == "farey_left":
            out = y / (1.0 + y)
        elif self.family == "farey_right":
            out = 1.0 / (1.0 + y)
        else:
            out = _power_inverse(self.c, self.s, self.lift + y, lo, hi)
        out = np.clip(out, lo, hi)
        return out if out.ndim else float(out)

    def preimage_interval(self, lo: float, hi: float) -> tuple[float, float]:
        """Preimage of [lo, hi] as a sorted interval (handles orientation)."""
        a = self.inverse(lo)
        b = self.inverse(hi)
        return (a, b) if a <= b else (b, a)


def _power_inverse(c: float, s: float, z, lo: float, hi: float):
    """Solve x + c*x**(1+s) = z on [lo, hi] (increasing convex) by Newton.

    Starts at the right endpoint so convexity makes the iteration decrease
    monotonically onto the root; a bisection sweep catches any stragglers.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    x = np.full_like(z, hi)
    for _ in range(120):
        fx = x + c * x ** (1.0 + s) - z
        dfx = 1.0 + c * (1.0 + s) * x**s
        x_new = np.clip(x - fx / dfx, lo, hi)
        # Relative step criterion: near a root at 0 the absolute steps are
        # tiny long before the relative error is, so 1e-16*|x| not 1e-16.
        if np.all(np.abs(x_new - x) <= 1e-16 * np.abs(x_new)):
            x = x_new
            break
        x = x_new
    resid = np.abs(x + c * x ** (1.0 + s) - z)
    bad = resid > 1e-12 * np.maximum(np.abs(z), x)
    if np.any(bad):
        xlo = np.full(int(bad.sum()), lo)
        xhi = np.full(int(bad.sum()), hi)
        zb = z[bad]
        for _ in range(120):
            xm = 0.5 * (xlo + xhi)
            below = xm + c * xm ** (1.0 + s) < zb
            xlo = np.where(below, xm, xlo)
            xhi = np.where(below, xhi, xm)
        xb = 0.5 * (xlo + xhi)
        for _ in range(10):  # Newton polish from the bisection seed
            fb = xb + c * xb ** (1.0 + s) - zb
            xb = np.clip(xb - fb / (1.0 + c * (1.0 + s) * xb**s), lo, hi)
        x[bad] = xb
    return x[0] if scalar else x


@dataclass(frozen=True)
class ParabolicOrbit:
    """A periodic orbit where |(T^m)'| = 1 to tolerance 1e-10.

    Attributes:
        word: branch indices (i_1, ..., i_m) coding the orbit.
        points: orbit points, points[k] in the domain of branch word[k].
        multiplier: computed |(T^m)'| at the orbit (should be 1 to 1e-10).
        beta: one-sided degeneracy exponent of ||(T^m)'| - 1| ~ L*|x - w|**beta.
        L: prefactor of the power law above.
        analytic: True when beta and L come from a closed form, not a fit.
    """

    word: tuple[int, ...]
    points: tuple[float, ...]
    multiplier: float
    beta: float
    L: float
    analytic: bool

    @property
    def period(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class ExponentFit:
    """Result of the log-log regression behind a parabolic exponent."""

    beta: float
    L: float
    residual: float
    offsets_used: int
    side: int
    analytic_beta: float | None = None
    analytic_L: float | None = None


class MarkovMap:
    """Validated Markov interval map.  Construct via :func:`build_map`."""

    def __init__(
        self,
        branches: tuple[Branch, ...],
        transition: np.ndarray,
        aperiodicity_power: int,
        parabolic_orbits: tuple[ParabolicOrbit, ...],
        core_spans: tuple[tuple[float, float], ...],
    ):
        self.branches = branches
        transition = np.array(transition, dtype=np.int8)
        transition.setflags(write=False)
        self.transition = transition
        self.aperiodicity_power = aperiodicity_power
        self.parabolic_orbits = parabolic_orbits
        self.core_spans = core_spans
        self.follow_spans = tuple(
            _hull([core_spans[j] for j in range(len(branches)) if transition[i, j]])
            for i in range(len(branches))
        )
        self._table_cache: dict = {}
        self._cache_lock = threading.Lock()

    # -- basic queries ------------------------------------------------------

    @property
    def p(self) -> int:
        return len(self.branches)

    @property
    def has_parabolic(self) -> bool:
        return bool(self.parabolic_orbits)

    @property
    def is_full_shift(self) -> bool:
        return bool(np.all(self.transition == 1))

    def admissible(self, word: Sequence[int]) -> bool:
        """True when every consecutive pair of symbols is allowed."""
        for a, b in zip(word, word[1:]):
            if not self.transition[a, b]:
                return False
        return all(0 <= i < self.p for i in word)

    def word_count(self, n: int) -> int:
        """Number of admissible words of length n (exact integer arithmetic)."""
        if n < 1:
            raise ValueError("word length must be >= 1")
        p = self.p
        rows = [[int(self.transition[i, j]) for j in range(p)] for i in range(p)]
        vec = [1] * p
        for _ in range(n - 1):
            vec = [sum(rows[i][j] * vec[j] for j in range(p)) for i in range(p)]
        return sum(vec)

    def parabolic_symbols(self) -> frozenset[int]:
        """Symbols visited by some parabolic orbit."""
        out: set[int] = set()
        for orbit in self.parabolic_orbits:
            out.update(orbit.word)
        return frozenset(out)

    def log_deriv_bounds(self) -> tuple[float, float]:
        """(inf, sup) of log|T'| over the core spans, exact per family."""
        lows, highs = [], []
        for br, (lo, hi) in zip(self.branches, self.core_spans):
            a, b = br.log_deriv_range(lo, hi)
            lows.append(float(a))
            highs.append(float(b))
        return min(lows), max(highs)

    def __repr__(self) -> str:  # terse; maps appear in error messages
        tag = "parabolic" if self.has_parabolic else "uniformly expanding"
        return f"MarkovMap(p={self.p}, {tag}, k={self.aperiodicity_power})"


def _hull(intervals: Iterable[tuple[float, float]]) -> tuple[float, float]:
    intervals = list(intervals)
    if not intervals:
        raise MarkovViolation("a branch has an empty follow set (zero row in A)")
    return min(a for a, _ in intervals), max(b for _, b in intervals)


# ---------------------------------------------------------------------------
# construction and validation


def build_map(
    branches: Sequence[Branch],
    transition=None,
    *,
    period_bound: int = 3,
    expansion_grid: int = 1024,
) -> MarkovMap:
    """Validate branches, derive/verify the transition matrix, detect parabolics.

    Args:
        branches: branch specs ordered left to right by domain.
        transition: 0/1 matrix A with A[i,j] = 1 when T_i(J_i) covers J_j;
            pass None to derive it from the declared images.
        period_bound: maximum period scanned for parabolic orbits.
        expansion_grid: grid points per branch for the expansion check.

    Returns:
        An immutable MarkovMap.

    Raises:
        MarkovViolation: overlapping domains, endpoint mismatches, or a
            transition matrix inconsistent with the images.
        ContractionViolation: |T'| < 1 somewhere, or |T'| = 1 away from
            every detected parabolic orbit.
        NotTransitive: no power A^(k+1) is strictly positive.
    """
    branches = tuple(branches)
    if not branches:
        raise ValueError("need at least one branch")
    _check_domains_disjoint(branches)
    for i, br in enumerate(branches):
        _check_endpoints(i, br)
    A = _derive_or_check_transition(branches, transition)
    k = _aperiodicity_power(A)
    _check_expansion(branches, expansion_grid)
    core = _core_spans(branches, A)
    orbits = _detect_parabolic_orbits(branches, A, core, period_bound)
    _check_unit_derivative_locus(branches, orbits, expansion_grid, period_bound)
    return MarkovMap(branches, A, k, orbits, core)


def _check_domains_disjoint(branches: tuple[Branch, ...]) -> None:
    order = sorted(range(len(branches)), key=lambda i: branches[i].domain[0])
    if list(order) != list(range(len(branches))):
        raise MarkovViolation("branches must be listed left to right by domain")
    for i in range(len(branches) - 1):
        if branches[i].domain[1] > branches[i + 1].domain[0] + ENDPOINT_TOL:
            raise MarkovViolation(
                f"domains of branches {i} and {i + 1} overlap beyond tolerance"
            )


def _check_endpoints(i: int, br: Branch) -> None:
    lo, hi = br.domain
    ilo, ihi = br.image
    va, vb = br.value(lo), br.value(hi)
    lo_target, hi_target = (ilo, ihi) if br.increasing else (ihi, ilo)
    if abs(va - lo_target) > 1e-9 or abs(vb - hi_target) > 1e-9:
        raise MarkovViolation(
            f"branch {i}: endpoints map to ({va:.17g}, {vb:.17g}), "
            f"declared image is ({ilo:.17g}, {ihi:.17g})"
        )


def _derive_or_check_transition(branches: tuple[Branch, ...], transition) -> np.ndarray:
    p = len(branches)
    derived = np.zeros((p, p), dtype=np.int8)
    for i, bi in enumerate(branches):
        ilo, ihi = bi.image
        for j, bj in enumerate(branches):
            jlo, jhi = bj.domain
            if jlo >= ilo - ENDPOINT_TOL and jhi <= ihi + ENDPOINT_TOL:
                derived[i, j] = 1
            elif jhi > ilo + ENDPOINT_TOL and jlo < ihi - ENDPOINT_TOL:
                raise MarkovViolation(
                    f"image of branch {i} cuts through the interior of domain {j}; "
                    "not a Markov partition"
                )
    if transition is None:
        A = derived
    else:
        A = np.array(transition, dtype=np.int8)
        if A.shape != (p, p) or not np.isin(A, (0, 1)).all():
            raise MarkovViolation(f"transition must be a {p}x{p} 0/1 matrix")
        if not np.array_equal(A, derived):
            bad = np.argwhere(A != derived)
            i, j = bad[0]
            raise MarkovViolation(
                f"transition[{i},{j}]={A[i, j]} contradicts the branch images "
                f"(image coverage says {derived[i, j]})"
            )
    if np.any(A.sum(axis=1) == 0):
        raise MarkovViolation("every branch image must cover at least one domain")
    return A


def _aperiodicity_power(A: np.ndarray) -> int:
    p = A.shape[0]
    # Wielandt: a primitive matrix satisfies A^(p^2 - 2p + 2) > 0.
    bound = max(p * p - 2 * p + 2, 1)
    power = np.array(A, dtype=object)
    for q in range(1, bound + 1):
        if np.all(power > 0):
            return q
        power = power @ A
    raise NotTransitive(
        f"no power A^q with q <= {bound} is strictly positive; "
        "the subshift is not topologically mixing"
    )


def _check_expansion(branches: tuple[Branch, ...], grid: int) -> None:
    for i, br in enumerate(branches):
        if br.family == "linear" and abs(br.slope) <= 1.0 + 1e-9:
            if abs(br.slope) < 1.0 - ENDPOINT_TOL:
                raise ContractionViolation(f"branch {i}: |slope| < 1")
            raise ContractionViolation(
                f"branch {i}: |slope| = 1 makes a whole interval non-expanding"
            )
        lo, hi = br.domain
        xs = np.linspace(lo, hi, grid + 1)
        d = np.abs(br.derivative(xs))
        if float(np.min(d)) < 1.0 - ENDPOINT_TOL:
            x_bad = float(xs[int(np.argmin(d))])
            raise ContractionViolation(
                f"branch {i}: |T'({x_bad:.17g})| = {float(np.min(d)):.17g} < 1"
            )


def _core_spans(branches: tuple[Branch, ...], A: np.ndarray) -> tuple[tuple[float, float], ...]:
    """Outer enclosures of the per-symbol spans of the repeller.

    Iterates span_i <- T_i^{-1}(hull of follow spans) from the full domains.
    The iteration is monotone decreasing and stays an outer approximation,
    so stopping early only widens downstream brackets, never breaks them.
    """
    spans = [br.domain for br in branches]
    p = len(branches)
    for _ in range(500):
        new_spans = []
        moved = 0.0
        for i in range(p):
            hull = _hull([spans[j] for j in range(p) if A[i, j]])
            cand = branches[i].preimage_interval(*hull)
            old = spans[i]
            cand = (max(cand[0], old[0]), min(cand[1], old[1]))
            moved = max(moved, old[0] - cand[0], cand[0] - old[0], abs(cand[1] - old[1]))
            new_spans.append(cand)
        spans = new_spans
        if moved < 1e-15:
            break
    return tuple(spans)


def _rotations(word: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [word[i:] + word[:i] for i in range(len(word))]


def _is_primitive(word: tuple[int, ...]) -> bool:
    m = len(word)
    for d in range(1, m):
        if m % d == 0 and word == word[: d] * (m // d):
            return False
    return True


def _detect_parabolic_orbits(
    branches: tuple[Branch, ...],
    A: np.ndarray,
    core: tuple[tuple[float, float], ...],
    period_bound: int,
) -> tuple[ParabolicOrbit, ...]:
    p = len(branches)
    found: list[ParabolicOrbit] = []
    seen: set[tuple[int, ...]] = set()
    for m in range(1, period_bound + 1):
        for word in _admissible_cyclic_words(A, m):
            if not _is_primitive(word):
                continue
            canon = min(_rotations(word))
            if canon in seen:
                continue
            seen.add(canon)
            point = _periodic_point(branches, A, core, canon)
            if point is None:
                continue
            points = [point]
            for sym in canon[:-1]:
                points.append(float(branches[sym].value(points[-1])))
            mult = 1.0
            for sym, x in zip(canon, points):
                mult *= abs(float(branches[sym].derivative(x)))
            if abs(mult - 1.0) <= PARABOLIC_TOL:
                beta, L, analytic = _closed_form_exponent(branches, canon, points)
                found.append(
                    ParabolicOrbit(canon, tuple(points), mult, beta, L, analytic)
                )
    found.sort(key=lambda o: o.points[0])
    return tuple(found)


def _admissible_cyclic_words(A: np.ndarray, m: int) -> list[tuple[int, ...]]:
    p = A.shape[0]
    words: list[tuple[int, ...]] = []

    def extend(prefix: tuple[int, ...]) -> None:
        if len(prefix) == m:
            if A[prefix[-1], prefix[0]]:
                words.append(prefix)
            return
        for j in range(p):
            if A[prefix[-1], j]:
                extend(prefix + (j,))

    for i in range(p):
        extend((i,))
    return words


def _periodic_point(
    branches: tuple[Branch, ...],
    A: np.ndarray,
    core: tuple[tuple[float, float], ...],
    word: tuple[int, ...],
) -> float | None:
    """Fixed point of the inverse-branch composition along `word`.

    The composition F = T_{w1}^{-1} o ... o T_{wm}^{-1} is 1-Lipschitz, so
    h(x) = F(x) - x is monotone nonincreasing and bisection is reliable even
    at parabolic points where direct iteration crawls.
    """
    p = len(branches)
    last = word[-1]
    hull = _hull([core[j] for j in range(p) if A[last, j]])

    def compose(x: float) -> float:
        for sym in reversed(word):
            x = float(branches[sym].inverse(x, clamp_tol=1e-6))
        return x

    lo, hi = hull
    h_lo = compose(lo) - lo
    h_hi = compose(hi) - hi
    if h_lo < -1e-12 or h_hi > 1e-12:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if compose(mid) - mid >= 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    # Reject pseudo-fixed points produced by clamping at the hull edge.
    if abs(compose(x) - x) > 1e-9:
        return None
    return x


def _closed_form_exponent(
    branches: tuple[Branch, ...],
    word: tuple[int, ...],
    points: Sequence[float],
) -> tuple[float, float, bool]:
    """Analytic (beta, L) for period-1 parabolic points of closed-form families."""
    if len(word) == 1:
        br = branches[word[0]]
        x = points[0]
        if br.family in ("manneville_pomeau", "power") and abs(x) <= 1e-12:
            return br.s, br.c * (1.0 + br.s), True
        if br.family == "farey_left" and abs(x) <= 1e-12:
            return 1.0, 2.0, True
    fit = _fit_exponent(branches, word, points)
    return fit.beta, fit.L, False


def parabolic_exponent(m: MarkovMap, orbit: ParabolicOrbit) -> ExponentFit:
    """Fit ||(T^m)'(x)| - 1| ~ L * |x - w|**beta near the orbit point.

    Offsets run over the geometric sequence 2^-5 .. 2^-30 on the one side of
    the orbit point that stays inside the branch domain; the regression uses
    the small-offset half of the usable points, where the power law is the
    dominant term.  Closed-form families also report the analytic values.

    Raises:
        FitUnstable: fewer than 6 usable offsets, nonpositive fitted beta,
            or regression residual above 1e-3.
    """
    fit = _fit_exponent(m.branches, orbit.word, orbit.points)
    if orbit.analytic:
        return ExponentFit(
            beta=fit.beta,
            L=fit.L,
            residual=fit.residual,
            offsets_used=fit.offsets_used,
            side=fit.side,
            analytic_beta=orbit.beta,
            analytic_L=orbit.L,
        )
    return fit


def _fit_exponent(
    branches: tuple[Branch, ...],
    word: tuple[int, ...],
    points: Sequence[float],
    *,
    residual_tol: float = 1e-3,
) -> ExponentFit:
    offsets = 2.0 ** -np.arange(5, 31)
    x0 = points[0]
    dom = branches[word[0]].domain
    if x0 + offsets[0] <= dom[1]:
        side = 1
    elif x0 - offsets[0] >= dom[0]:
        side = -1
    else:
        raise FitUnstable("no one-sided neighbourhood fits inside the branch domain")

    gaps = []
    used_offsets = []
    for t in offsets:
        x = x0 + side * t
        mult = 1.0
        ok = True
        for sym in word:
            br = branches[sym]
            blo, bhi = br.domain
            if x < blo - 0.1 or x > bhi + 0.1:
                ok = False
                break
            mult *= abs(float(br.derivative(x)))
            x = float(br.value(x))
        if not ok:
            continue
        g = abs(mult - 1.0)
        if g < 1e-14:  # below rounding noise of the product
            continue
        gaps.append(g)
        used_offsets.append(t)
    if len(gaps) < 6:
        raise FitUnstable(
            f"only {len(gaps)} usable offsets; orbit too degenerate to fit"
        )
    # Small-offset half of the usable sequence: the asymptotic window.
    half = len(gaps) // 2
    log_t = np.log(np.array(used_offsets[half:]))
    log_g = np.log(np.array(gaps[half:]))
    beta, intercept = np.polyfit(log_t, log_g, 1)
    residual = float(np.max(np.abs(log_g - (beta * log_t + intercept))))
    if residual > residual_tol:
        raise FitUnstable(f"log-log regression residual {residual:.3e} > {residual_tol}")
    if beta <= 0.0:
        raise FitUnstable(f"fitted exponent beta = {beta:.3e} is not positive")
    return ExponentFit(
        beta=float(beta),
        L=float(math.exp(intercept)),
        residual=residual,
        offsets_used=len(log_t),
        side=side,
    )


def _check_unit_derivative_locus(
    branches: tuple[Branch, ...],
    orbits: tuple[ParabolicOrbit, ...],
    grid: int,
    period_bound: int,
) -> None:
    """Require every |T'| = 1 point to feed into a detected parabolic orbit."""
    orbit_points = [x for o in orbits for x in o.points]
    for i, br in enumerate(branches):
        lo, hi = br.domain
        xs = np.linspace(lo, hi, grid + 1)
        d = np.abs(br.derivative(xs))
        suspects = xs[np.abs(d - 1.0) <= 1e-9]
        for x in suspects:
            if not _reaches_parabolic(branches, float(x), orbit_points, 3 * period_bound + 8):
                raise ContractionViolation(
                    f"|T'| = 1 at x = {float(x):.17g} (branch {i}) but the forward "
                    "orbit never reaches a detected parabolic orbit"
                )


def _reaches_parabolic(
    branches: tuple[Branch, ...],
    x: float,
    orbit_points: Sequence[float],
    steps: int,
) -> bool:
    if not orbit_points:
        return False
    for _ in range(steps + 1):
        if min(abs(x - w) for w in orbit_points) <= 1e-6:
            return True
        nxt = None
        for br in branches:
            if br.domain[0] - ENDPOINT_TOL <= x <= br.domain[1] + ENDPOINT_TOL:
                nxt = float(br.value(min(max(x, br.domain[0]), br.domain[1])))
                break
        if nxt is None:
            return False
        x = nxt
    return False


# ---------------------------------------------------------------------------
# stock examples


def doubling_map() -> MarkovMap:
    """x -> 2x mod 1 with branches on [0, 1/2] and [1/2, 1]."""
    return build_map(
        [
            Branch("linear", (0.0, 0.5), (0.0, 1.0), slope=2.0, offset=0.0),
            Branch("linear", (0.5, 1.0), (0.0, 1.0), slope=2.0, offset=-1.0),
        ]
    )


def linear_full_branch_map(slopes: Sequence[float]) -> MarkovMap:
    """Full-shift map whose branch i is linear with the given slope onto [0, 1].

    Domains are consecutive intervals of width 1/|slope_i| starting at 0.
    When the widths sum to less than 1 the repeller is a Cantor set; they
    may not exceed 1.
    """
    widths = [1.0 / abs(s) for s in slopes]
    if sum(widths) > 1.0 + 1e-12:
        raise ValueError("sum of 1/|slope_i| exceeds 1; domains cannot fit in [0, 1]")
    branches = []
    left = 0.0
    for s, w in zip(slopes, widths):
        right = left + w
        if s > 0:
            offset = -s * left
        else:
            offset = -s * right
        branches.append(Branch("linear", (left, right), (0.0, 1.0), slope=float(s), offset=offset))
        left = right
    return build_map(branches)


def golden_mean_map() -> MarkovMap:
    """Doubling-slope branches with the 11-count forbidden (A = [[1,1],[1,0]])."""
    return build_map(
        [
            Branch("linear", (0.0, 0.5), (0.0, 1.0), slope=2.0, offset=0.0),
            Branch("linear", (0.5, 0.75), (0.0, 0.5), slope=2.0, offset=-1.0),
        ],
        transition=[[1, 1], [1, 0]],
    )


def manneville_pomeau_map(s: float = 0.5) -> MarkovMap:
    """T(x) = x + x**(1+s) mod 1, split at the preimage of 1."""
    if s <= 0.0:
        raise ValueError("s must be positive")

    def raw(x: float) -> float:
        return x + x ** (1.0 + s) - 1.0

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if raw(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    split = 0.5 * (lo + hi)
    return build_map(
        [
            Branch("manneville_pomeau", (0.0, split), (0.0, 1.0), s=s),
            Branch("manneville_pomeau", (split, 1.0), (0.0, 1.0), s=s),
        ]
    )


def farey_map() -> MarkovMap:
    """x/(1-x) on [0, 1/2] and (1-x)/x on [1/2, 1]."""
    return build_map(
        [
            Branch("farey_left", (0.0, 0.5), (0.0, 1.0)),
            Branch("farey_right", (0.5, 1.0), (0.0, 1.0)),
        ]
    )
