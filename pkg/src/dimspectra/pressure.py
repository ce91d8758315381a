"""Topological pressure from finite-level cylinder data.

All quantities here come with certified finite-level enclosures:

    upper: (1/n) log Z_n^sup is an upper bound for every n because sup-sums
        are submultiplicative over word concatenation.
    lower: (log Z_n^inf + k*inf f) / (n + k) is a lower bound, obtained by
        gluing arbitrary n-words with connector words of the fixed length k
        that primitivity of the transition matrix guarantees, and paying the
        worst-case potential value on the k connector symbols.

The bracket width decays like 1/n, which is far too slow for tight targets,
so the reported `value` is the ratio estimate log(Z_{n+1}^sup / Z_n^sup).
Under a spectral gap the ratio converges geometrically; its successive-gap
Cauchy test is the practical stopping rule, while the bracket stays the
certificate.  Parabolic maps have no spectral gap and no finite-level upper
certificate for Bowen roots (the neutral word pins sup-sums at a nonnegative
pressure), which is reported honestly as an infinite upper endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotConverged, NotStrictlyNegative
from .maps import MarkovMap
from .numerics import (
    AitkenAccelerator,
    bisect_root,
    expand_to_sign_change,
    log_sum_exp,
)
from .symbolic import CylinderTable, Potential, shared_table


@dataclass(frozen=True)
class Pressure:
    """Pressure estimate with a certified enclosure.

    `value` is the ratio estimate (or the bracket midpoint when the bracket
    itself met the tolerance; `mode` records which).  `lower`/`upper` always
    hold the best certified enclosure seen up to `level`.
    """

    value: float
    lower: float
    upper: float
    level: int
    mode: str

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class BowenRoot:
    """Root s of P(-s log|T'|) = 0 with a certified enclosure.

    For parabolic maps `upper` is +inf: the neutral fixed word keeps every
    finite-level sup-sum at nonnegative pressure, so no finite computation
    can certify an upper bound.  `value` is the partition-ratio root for
    hyperbolic maps (geometric convergence) and the Moran-equation root
    sum_w diam(w)^s = 1 for parabolic ones, where cylinders tile the whole
    interval and the equation is exact at every level.
    """

    value: float
    lower: float
    upper: float
    level: int
    parabolic: bool

    @property
    def width(self) -> float:
        return self.upper - self.lower


def gluing_length(m: MarkovMap) -> int:
    """Symbols needed between any two admissible words to rejoin them.

    A^q > 0 gives a path of q edges between any symbol pair, i.e. q - 1
    intermediate symbols; full shifts need none.
    """
    return max(m.aperiodicity_power - 1, 0)


def level_logsums(
    table: CylinderTable,
    n: int,
    coeff_psi: float,
    coeff_phi: float = 0.0,
    *,
    threads: int | None = None,
) -> tuple[float, float]:
    """(log Z_n^inf, log Z_n^sup) for the potential a*log|T'| + b*phi."""
    arr = table.level(n)
    f_lo, f_hi = arr.combined(coeff_psi, coeff_phi)
    return log_sum_exp(f_lo, threads), log_sum_exp(f_hi, threads)


def potential_floor(
    table: CylinderTable, coeff_psi: float, coeff_phi: float = 0.0
) -> float:
    """Certified lower bound for inf of the combined potential on the core."""
    f_lo, _ = table.level(1).combined(coeff_psi, coeff_phi)
    return float(np.min(f_lo))


def level_bracket(
    m: MarkovMap,
    table: CylinderTable,
    n: int,
    coeff_psi: float,
    coeff_phi: float = 0.0,
    *,
    threads: int | None = None,
) -> tuple[float, float]:
    """Certified (lower, upper) pressure bounds from level n alone."""
    z_inf, z_sup = level_logsums(table, n, coeff_psi, coeff_phi, threads=threads)
    k = gluing_length(m)
    lower = (z_inf + k * potential_floor(table, coeff_psi, coeff_phi)) / (n + k)
    return lower, z_sup / n


def pressure_bracket(
    m: MarkovMap,
    phi: Potential,
    n: int,
    *,
    threads: int | None = None,
) -> Pressure:
    """Single-level pressure enclosure for a potential; value is the midpoint."""
    table = shared_table(m, phi)
    lower, upper = level_bracket(m, table, n, 0.0, 1.0, threads=threads)
    return Pressure(0.5 * (lower + upper), lower, upper, n, "bracket")


def _pressure_ladder(
    m: MarkovMap,
    table: CylinderTable,
    coeff_psi: float,
    coeff_phi: float,
    *,
    tol: float,
    max_level: int,
    threads: int | None = None,
) -> Pressure:
    """Shared ladder behind pressure() and the spectrum solvers.

    Stops when the certified bracket or the ratio Cauchy gap reaches `tol`.
    """
    k = gluing_length(m)
    floor = potential_floor(table, coeff_psi, coeff_phi)
    best_lo, best_hi = -math.inf, math.inf
    z_sup_prev: float | None = None
    ratio_prev: float | None = None
    accel = AitkenAccelerator()
    est_prev: float | None = None
    est = math.nan
    for n in range(1, max_level + 1):
        z_inf, z_sup = level_logsums(table, n, coeff_psi, coeff_phi, threads=threads)
        best_lo = max(best_lo, (z_inf + k * floor) / (n + k))
        best_hi = min(best_hi, z_sup / n)
        if best_hi - best_lo <= tol:
            return Pressure(0.5 * (best_lo + best_hi), best_lo, best_hi, n, "bracket")
        ratio = z_sup - z_sup_prev if z_sup_prev is not None else None
        if ratio is not None:
            est = accel.push(ratio)
            raw_ok = ratio_prev is not None and abs(ratio - ratio_prev) <= tol
            acc_ok = est_prev is not None and abs(est - est_prev) <= tol
            if raw_ok or acc_ok:
                value = min(max(est, best_lo), best_hi)
                return Pressure(value, best_lo, best_hi, n, "ratio")
            est_prev = est
        z_sup_prev, ratio_prev = z_sup, ratio
    raise NotConverged(
        f"pressure not within {tol:g} by level {max_level}; "
        f"certified enclosure [{best_lo:.12g}, {best_hi:.12g}], "
        f"last accelerated value {est:.12g}",
        enclosure=(best_lo, best_hi),
    )


def pressure(
    m: MarkovMap,
    phi: Potential,
    *,
    tol: float = 1e-8,
    max_level: int = 32,
    threads: int | None = None,
) -> Pressure:
    """Pressure of a potential by the level ladder.

    Raises:
        NotConverged: neither the certified bracket nor the ratio Cauchy gap
            reached `tol` by `max_level`; the best enclosure rides along.
    """
    table = shared_table(m, phi)
    return _pressure_ladder(
        m, table, 0.0, 1.0, tol=tol, max_level=max_level, threads=threads
    )


def normalize_potential(
    m: MarkovMap,
    phi: Potential,
    *,
    tol: float = 1e-10,
    max_level: int = 32,
    require_negative: bool = True,
) -> Potential:
    """Shift a potential so its pressure vanishes.

    Depth-1 locally constant potentials on full shifts normalize in closed
    form (Z_n factorizes), which is what downstream exact-mode checks rely
    on; anything else goes through the pressure ladder to `tol`.

    Raises:
        NotStrictlyNegative: when `require_negative` and the normalized
            potential is not strictly negative on the symbol space.
    """
    if (
        phi.kind == "locally_constant"
        and phi.depth == 1
        and m.is_full_shift
    ):
        values = np.array([v for _, v in phi.table]) - phi.pressure_shift
        shift = log_sum_exp(values)
    else:
        shift = pressure(m, phi, tol=tol, max_level=max_level).value
    out = phi.shifted_by(shift)
    if require_negative:
        sup = out.bounds(m)[1]
        if sup >= 0.0:
            raise NotStrictlyNegative(
                f"normalized potential has sup {sup:.6g} >= 0 on the symbol space"
            )
    return out


def _moran_root(table: CylinderTable, n: int, threads: int | None) -> float:
    """Root of sum_w diam(w)^s = 1 at level n (unique: strictly decreasing)."""
    log_d = np.log(table.level(n).diameters())

    def total(s: float) -> float:
        return log_sum_exp(s * log_d, threads)

    lo, hi = expand_to_sign_change(total, 0.0, 1.0, max_expand=40)
    return bisect_root(total, max(lo, 0.0), hi, xtol=1e-14)


def bowen_root(
    m: MarkovMap,
    *,
    tol: float = 1e-6,
    max_level: int = 22,
    threads: int | None = None,
) -> BowenRoot:
    """Dimension-type root of s -> P(-s log|T'|).

    Enclosure endpoints are roots of the certified lower/upper pressure
    curves at the final level (both strictly decreasing in s).  Convergence
    is the enclosure width for hyperbolic maps; parabolic maps, whose upper
    endpoint is +inf at any feasible level, fall back to the Cauchy gap of
    the Moran-equation values.

    Raises:
        NotConverged: neither criterion met by `max_level`.
    """
    table = shared_table(m, None)
    k = gluing_length(m)
    parabolic = m.has_parabolic
    psi_sup = float(np.max(table.level(1).psi_hi))
    best_lo, best_hi = 0.0, math.inf
    value = math.nan
    value_prev: float | None = None
    for n in range(2, max_level + 1):
        arr = table.level(n)
        prev = table.level(n - 1)

        def lower_curve(s: float) -> float:
            z_inf = log_sum_exp(-s * arr.psi_hi, threads)
            return (z_inf - k * s * psi_sup) / (n + k)

        def upper_curve(s: float) -> float:
            return log_sum_exp(-s * arr.psi_lo, threads) / n

        def ratio_curve(s: float) -> float:
            return log_sum_exp(-s * arr.psi_lo, threads) - log_sum_exp(
                -s * prev.psi_lo, threads
            )

        lo_bracket = expand_to_sign_change(lower_curve, 0.0, 8.0, max_expand=16)
        best_lo = max(best_lo, bisect_root(lower_curve, *lo_bracket, xtol=1e-12))
        if parabolic:
            # The Moran root is exact for full-interval parabolic maps; the
            # ratio root would inherit the neutral word's slow drift.
            value = _moran_root(table, n, threads)
        else:
            hi_bracket = expand_to_sign_change(upper_curve, 0.0, 8.0, max_expand=16)
            best_hi = min(best_hi, bisect_root(upper_curve, *hi_bracket, xtol=1e-12))
            rt_bracket = expand_to_sign_change(ratio_curve, 0.0, 8.0, max_expand=16)
            value = bisect_root(ratio_curve, *rt_bracket, xtol=1e-13)
        if not parabolic and best_hi - best_lo <= tol:
            return BowenRoot(min(max(value, best_lo), best_hi), best_lo, best_hi, n, False)
        if value_prev is not None and abs(value - value_prev) <= tol:
            upper = math.inf if parabolic else best_hi
            return BowenRoot(value, best_lo, upper, n, parabolic)
        value_prev = value
    raise NotConverged(
        f"bowen root not within {tol:g} by level {max_level}; "
        f"enclosure [{best_lo:.12g}, {best_hi:.12g}], last value {value:.12g}",
        enclosure=(best_lo, best_hi),
    )
