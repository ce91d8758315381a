"""Finitely supported block measures on cylinder words.

A block measure is a probability vector over admissible n-words.  Repeating
independent blocks, joined by fixed connector words of a uniform length k,
yields a measure invariant under the (n+k)-fold shift; averaging its shifts
gives a fully shift-invariant measure whose entropy follows from Abramov's
formula and whose Birkhoff statistics differ from the block statistics by a
connector-dilution term that vanishes as the level grows.

Support words must be uniformly expanding on their cylinders (Birkhoff sum
of log|T'| strictly positive).  On parabolic maps this excludes the words
that never leave the neutral region; without the restriction the glued
concatenations would not stay expanding and none of the error bars would
hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ConstraintInfeasible,
    EmptyWindow,
    InadmissibleSupport,
    NoConnector,
)
from .maps import MarkovMap
from .numerics import bisect_root, expand_to_sign_change, log_sum_exp
from .symbolic import Potential, shared_table, words_at_level

CONNECTOR_CAP_SLACK = 8


@dataclass(frozen=True)
class ConnectorTable:
    """Uniform-length connectors for gluing level-n words.

    `words[(s, g)]` is the lexicographically least word w of length k such
    that s + w + g is an admissible path; it joins any eligible word ending
    in s to any word starting with g.  `eligible` marks the level-n words
    whose own expansion lower bracket is strictly positive; only those may
    carry block weight.
    """

    level: int
    k: int
    words: dict[tuple[int, int], tuple[int, ...]]
    eligible: np.ndarray
    excluded: int

    def join(self, u: Sequence[int], v: Sequence[int]) -> tuple[int, ...]:
        u, v = tuple(u), tuple(v)
        return u + self.words[(u[-1], v[0])] + v


def _exact_length_word(
    m: MarkovMap, start: int, goal: int, k: int
) -> tuple[int, ...] | None:
    """Lex-least w with len(w) = k and start + w + goal an admissible path."""
    adj = m.transition.astype(bool)
    # reach[d][s]: goal is exactly d edges from s.
    reach = [np.zeros(m.p, dtype=bool)]
    reach[0][goal] = True
    for _ in range(k + 1):
        reach.append(adj @ reach[-1])
    if not reach[k + 1][start]:
        return None
    word: list[int] = []
    sym = start
    for remaining in range(k, 0, -1):
        sym = min(
            s for s in range(m.p) if m.transition[sym, s] and reach[remaining][s]
        )
        word.append(sym)
    return tuple(word)


def connector_length(
    m: MarkovMap, n: int, *, k_max: int | None = None
) -> ConnectorTable:
    """Smallest uniform connector length for gluing eligible level-n words.

    Searches k = 0, 1, 2, ... until every ordered symbol pair (last symbol,
    next first symbol) admits a length-k join and the glued expansion stays
    strictly positive: the lower Birkhoff bracket of the leading word plus
    the connector's own bracket must exceed zero.  Words failing that bound
    on their own (neutral-orbit words on parabolic maps) are excluded from
    eligibility rather than from the search.

    Raises:
        NoConnector: no uniform length up to k_max works (default cap
            3 * aperiodicity_power + 8).
    """
    table = shared_table(m, None)
    arr = table.level(n)
    eligible = arr.psi_lo > 0.0
    if not np.any(eligible):
        raise NoConnector(f"no level-{n} word has positive expansion bracket")
    min_psi = float(np.min(arr.psi_lo[eligible]))
    cap = k_max if k_max is not None else 3 * m.aperiodicity_power + CONNECTOR_CAP_SLACK

    lvl = {}
    for k in range(cap + 1):
        words: dict[tuple[int, int], tuple[int, ...]] = {}
        ok = True
        for s in range(m.p):
            for g in range(m.p):
                w = _exact_length_word(m, s, g, k)
                if w is None:
                    ok = False
                    break
                words[(s, g)] = w
            if not ok:
                break
        if not ok:
            continue
        if k > 0:
            if k not in lvl:
                lvl[k] = table.level(k)
            karr = lvl[k]
            index = {word: i for i, word in enumerate(words_at_level(m, k))}
            con_psi = min(float(karr.psi_lo[index[w]]) for w in set(words.values()))
        else:
            con_psi = 0.0
        if min_psi + con_psi > 0.0:
            return ConnectorTable(
                level=n,
                k=k,
                words=words,
                eligible=eligible,
                excluded=int(np.sum(~eligible)),
            )
    raise NoConnector(f"no uniform connector length up to {cap} glues level-{n} words")


@dataclass(frozen=True)
class BlockMeasure:
    """Probability weights on level-n words plus certified statistics.

    Per-symbol brackets (`lyapunov_bracket`, `phi_avg_bracket`) refer to the
    block itself: weighted Birkhoff sums divided by n.  The spread fields
    describe the shift-invariant concatenation measure, whose periods carry
    k extra connector symbols; its entropy rate is Abramov's
    entropy / (n + k), and its averages pick up connector contributions
    bounded by the global per-symbol range.  `lemma_bar` is the crude
    uniform bound k*L/(n+k) + rho_n with L = max(sup psi, sup|phi|), kept
    deliberately untightened so enclosures stay traceable.
    """

    level: int
    connector_k: int
    weights: np.ndarray
    entropy: float
    lyapunov_bracket: tuple[float, float]
    phi_avg_bracket: tuple[float, float]
    alpha_bracket: tuple[float, float]
    spread_entropy: float
    spread_lyapunov_bracket: tuple[float, float]
    spread_phi_bracket: tuple[float, float]
    spread_alpha_bracket: tuple[float, float]
    spread_dim_bracket: tuple[float, float]
    rho: float
    lemma_bar: float
    connectors: dict[tuple[int, int], tuple[int, ...]]


def _ratio_bracket(
    num_lo: float, num_hi: float, den_lo: float, den_hi: float
) -> tuple[float, float]:
    if den_lo <= 0.0:
        return (num_lo / den_hi if den_hi > 0 else math.inf, math.inf)
    return (num_lo / den_hi, num_hi / den_lo)


def block_measure(
    m: MarkovMap,
    phi: Potential | None,
    n: int,
    weights: Sequence[float] | np.ndarray | dict[tuple[int, ...], float],
) -> BlockMeasure:
    """Wrap a weight vector over level-n words with its certified statistics.

    Args:
        m: the map.
        phi: potential entering the ratio statistics; None for pure
            dimension bookkeeping.
        n: word length.
        weights: array in lexicographic word order, or a dict keyed by
            words (missing words get weight zero).

    Raises:
        InadmissibleSupport: weight on an inadmissible word, or on a word
            with nonpositive expansion bracket (gluing such words does not
            stay expanding).
        ConstraintInfeasible: negative weights or sum differing from 1 by
            more than 1e-9.
        EmptyWindow: no positive weight anywhere.
    """
    table = shared_table(m, phi)
    arr = table.level(n)
    if isinstance(weights, dict):
        index = {w: i for i, w in enumerate(words_at_level(m, n))}
        q = np.zeros(arr.count)
        for word, val in weights.items():
            if tuple(word) not in index:
                raise InadmissibleSupport(f"weight on inadmissible word {tuple(word)}")
            q[index[tuple(word)]] = float(val)
    else:
        q = np.asarray(weights, dtype=float)
        if q.shape != (arr.count,):
            raise ConstraintInfeasible(
                f"need {arr.count} weights for level {n}, got shape {q.shape}"
            )
    if np.any(q < 0.0):
        raise ConstraintInfeasible("block weights must be nonnegative")
    total = float(np.sum(q))
    if not np.isfinite(total) or abs(total - 1.0) > 1e-9:
        raise ConstraintInfeasible(f"block weights sum to {total:.12g}, not 1")
    if not np.any(q > 0.0):
        raise EmptyWindow("block measure has empty support")

    con = connector_length(m, n)
    if np.any((q > 0.0) & ~con.eligible):
        raise InadmissibleSupport(
            "weight on a word with nonpositive expansion bracket"
        )

    positive = q > 0.0
    entropy = float(-np.sum(q[positive] * np.log(q[positive]))) + 0.0
    zero = np.zeros(arr.count)
    phl = arr.phi_lo if arr.phi_lo is not None else zero
    phh = arr.phi_hi if arr.phi_hi is not None else zero
    psi_lo = float(q @ arr.psi_lo)
    psi_hi = float(q @ arr.psi_hi)
    phi_lo = float(q @ phl)
    phi_hi = float(q @ phh)

    k = con.k
    lvl1 = table.level(1)
    l1_phl = lvl1.phi_lo if lvl1.phi_lo is not None else np.zeros(lvl1.count)
    l1_phh = lvl1.phi_hi if lvl1.phi_hi is not None else np.zeros(lvl1.count)
    # Connector symbols contribute k values in the global per-symbol range.
    con_psi = (k * float(np.min(lvl1.psi_lo)), k * float(np.max(lvl1.psi_hi)))
    con_phi = (k * float(np.min(l1_phl)), k * float(np.max(l1_phh)))
    period = n + k
    spread_psi = ((psi_lo + con_psi[0]) / period, (psi_hi + con_psi[1]) / period)
    spread_phi = ((phi_lo + con_phi[0]) / period, (phi_hi + con_phi[1]) / period)
    spread_alpha = _ratio_bracket(
        -spread_phi[1], -spread_phi[0], spread_psi[0], spread_psi[1]
    )
    spread_h = entropy / period
    spread_dim = _ratio_bracket(spread_h, spread_h, spread_psi[0], spread_psi[1])

    rho = max(
        float(np.max(arr.psi_hi - arr.psi_lo)) / n,
        float(np.max(phh - phl)) / n,
    )
    sup_l = max(
        float(np.max(np.abs(lvl1.psi_hi))),
        float(np.max(np.abs(l1_phl))),
        float(np.max(np.abs(l1_phh))),
    )
    return BlockMeasure(
        level=n,
        connector_k=k,
        weights=q,
        entropy=entropy,
        lyapunov_bracket=(psi_lo / n, psi_hi / n),
        phi_avg_bracket=(phi_lo / n, phi_hi / n),
        alpha_bracket=_ratio_bracket(-phi_hi, -phi_lo, psi_lo, psi_hi),
        spread_entropy=spread_h,
        spread_lyapunov_bracket=spread_psi,
        spread_phi_bracket=spread_phi,
        spread_alpha_bracket=spread_alpha,
        spread_dim_bracket=spread_dim,
        rho=rho,
        lemma_bar=k * sup_l / period + rho,
        connectors=con.words,
    )


@dataclass(frozen=True)
class SpreadStats:
    """Statistics of the shift-invariant average of a block measure."""

    entropy: float
    lyapunov_bracket: tuple[float, float]
    phi_avg_bracket: tuple[float, float]
    alpha_bracket: tuple[float, float]
    dim_bracket: tuple[float, float]


def spread_to_shift_invariant(bm: BlockMeasure) -> SpreadStats:
    """Entropy rate and Birkhoff averages of the shift-invariant spread.

    Entropy is the block entropy over the period n + k (Abramov); averages
    carry the connector-dilution brackets already attached to the block.
    """
    return SpreadStats(
        entropy=bm.spread_entropy,
        lyapunov_bracket=bm.spread_lyapunov_bracket,
        phi_avg_bracket=bm.spread_phi_bracket,
        alpha_bracket=bm.spread_alpha_bracket,
        dim_bracket=bm.spread_dim_bracket,
    )


def optimize_block_weights(
    m: MarkovMap,
    phi: Potential,
    n: int,
    alpha: float,
    *,
    threads: int | None = None,
) -> BlockMeasure:
    """Entropy-maximizing block weights with mean ratio alpha at level n.

    Maximizes entropy / (weighted psi sum) subject to the ratio constraint
    (weighted -phi sum) / (weighted psi sum) = alpha, over eligible words.
    The maximizer is exponential-family, q_w = exp(a*psi_w + b*phi_w) at
    bracket midpoints: a normalizes, b matches the constraint.  Along the
    normalized family the constraint mean is monotone in b, so the outer
    solve is a bisection; the attained objective equals b*alpha - a, the
    finite-level mirror of the pressure-equation spectrum value.

    Raises:
        ConstraintInfeasible: alpha outside the reachable ratio range of
            eligible level-n words.
    """
    if phi is None:
        raise ConstraintInfeasible("ratio optimization needs a potential")
    table = shared_table(m, phi)
    arr = table.level(n)
    con = connector_length(m, n)
    mask = con.eligible
    psi = (0.5 * (arr.psi_lo + arr.psi_hi))[mask]
    phv = (0.5 * (arr.phi_lo + arr.phi_hi))[mask]
    ratios = -phv / psi
    if alpha <= float(np.min(ratios)) or alpha >= float(np.max(ratios)):
        raise ConstraintInfeasible(
            f"alpha = {alpha:g} outside the level-{n} ratio range "
            f"[{float(np.min(ratios)):.6g}, {float(np.max(ratios)):.6g}]"
        )

    def normalizing_a(b: float) -> float:
        def total(a: float) -> float:
            return log_sum_exp(a * psi + b * phv, threads)

        t0 = total(0.0)
        if t0 == 0.0:
            return 0.0
        # total is strictly increasing in a (psi > 0), so the sign at zero
        # fixes the search direction.
        lo, hi = expand_to_sign_change(total, 0.0, -1.0 if t0 > 0.0 else 1.0, max_expand=60)
        return bisect_root(total, lo, hi, xtol=1e-13)

    def constraint(b: float) -> float:
        a = normalizing_a(b)
        logq = a * psi + b * phv
        q = np.exp(logq - log_sum_exp(logq, threads))
        return float(q @ (phv + alpha * psi))

    g0 = constraint(0.0)
    if g0 == 0.0:
        b_star = 0.0
    else:
        step = 1.0 if g0 < 0.0 else -1.0  # constraint mean increases in b
        try:
            lo, hi = expand_to_sign_change(constraint, 0.0, step, max_expand=60)
        except ValueError as exc:
            raise ConstraintInfeasible(
                f"no exponential weights reach alpha = {alpha:g} at level {n}"
            ) from exc
        b_star = bisect_root(constraint, lo, hi, xtol=1e-11)
    a_star = normalizing_a(b_star)
    logq = a_star * psi + b_star * phv
    qm = np.exp(logq - log_sum_exp(logq, threads))
    q = np.zeros(arr.count)
    q[mask] = qm / qm.sum()
    return block_measure(m, phi, n, q)


def block_objective(bm: BlockMeasure) -> float:
    """entropy / (weighted psi sum) at bracket midpoints, the quantity
    optimize_block_weights maximizes."""
    mid = 0.5 * (bm.lyapunov_bracket[0] + bm.lyapunov_bracket[1]) * bm.level
    return bm.entropy / mid


def window_mask(
    m: MarkovMap, phi: Potential, n: int, alpha: float, eps: float
) -> np.ndarray:
    """Level-n words whose ratio bracket meets the open window
    (alpha - eps, alpha + eps)."""
    if phi is None:
        raise EmptyWindow("ratio window needs a potential")
    arr = shared_table(m, phi).level(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(arr.psi_hi > 0.0, -arr.phi_lo / arr.psi_hi, math.inf)
        hi = np.where(arr.psi_lo > 0.0, -arr.phi_hi / arr.psi_lo, math.inf)
        ratio_lo = np.minimum(lo, hi)
        ratio_hi = np.maximum(lo, hi)
    return (ratio_lo < alpha + eps) & (ratio_hi > alpha - eps)


def bowen_sn(
    m: MarkovMap,
    phi: Potential,
    n: int,
    alpha: float,
    eps: float,
    *,
    threads: int | None = None,
) -> float:
    """Root s of sum of diam^s over the level-n words in the alpha window.

    The window keeps words whose ratio bracket intersects
    (alpha - eps, alpha + eps); diameters enter at bracket midpoint.  The
    sum is strictly decreasing in s, so the root is found by bisection to
    1e-10.

    Raises:
        EmptyWindow: no word's ratio bracket meets the window.
    """
    mask = window_mask(m, phi, n, alpha, eps)
    count = int(np.sum(mask))
    if count == 0:
        raise EmptyWindow(
            f"no level-{n} ratio bracket meets ({alpha - eps:g}, {alpha + eps:g})"
        )
    if count == 1:
        return 0.0
    log_d = np.log(shared_table(m, phi).level(n).diameters()[mask])

    def total(s: float) -> float:
        return log_sum_exp(s * log_d, threads)

    lo, hi = expand_to_sign_change(total, 0.0, 1.0, max_expand=60)
    return bisect_root(total, lo, hi, xtol=1e-10)


def window_weights(
    m: MarkovMap,
    phi: Potential,
    n: int,
    alpha: float,
    eps: float,
    *,
    threads: int | None = None,
) -> tuple[BlockMeasure, float]:
    """Preset block weights q_w = diam(w)^(s_n) on the alpha window.

    s_n is the bowen_sn root, so the weights sum to 1 over the window
    before eligibility masking.  A regression partner for
    optimize_block_weights: both objectives agree within the connector and
    distortion slack.
    """
    s_n = bowen_sn(m, phi, n, alpha, eps, threads=threads)
    mask = window_mask(m, phi, n, alpha, eps)
    con = connector_length(m, n)
    mask &= con.eligible
    if not np.any(mask):
        raise EmptyWindow(f"alpha window at level {n} has no eligible words")
    table = shared_table(m, phi)
    q = np.zeros(table.level(n).count)
    d = table.level(n).diameters()[mask]
    w = np.exp(s_n * np.log(d))
    q[mask] = w / w.sum()
    return block_measure(m, phi, n, q), s_n


def moran_weights(
    m: MarkovMap, phi: Potential | None, n: int, *, threads: int | None = None
) -> tuple[BlockMeasure, float]:
    """Block measure with q_w = diam(w)^(s_n) over all eligible words.

    s_n here is the full-level root (window covering every word), the
    dimension ladder value.
    """
    from .pressure import _moran_root

    table = shared_table(m, phi)
    s_n = _moran_root(shared_table(m, None), n, threads)
    con = connector_length(m, n)
    d = table.level(n).diameters()
    q = np.where(con.eligible, np.exp(s_n * np.log(d)), 0.0)
    q /= q.sum()
    return block_measure(m, phi, n, q), s_n
