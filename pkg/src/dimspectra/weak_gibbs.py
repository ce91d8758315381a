"""Weak Gibbs measure models: mass brackets, local dimension, sampling.

A weak Gibbs measure assigns every n-cylinder a mass within e^{±n k_n} of
exp(S_n phi), for a normalized potential (zero pressure) and a decreasing
envelope k_n -> 0.  Two models are supported:

    exact: k_n = 0.  Only available where a true Gibbs product measure is
        computable in closed form: depth-1 locally constant potentials on
        full shifts whose weights already sum to 1.
    declared: k_n = c / n^gamma, a user-asserted envelope.  Existence of a
        weak Gibbs measure for continuous potentials is a theorem, but no
        constructive rate comes with it; declaring the law keeps the model
        honest (every output carries the corresponding bracket) and
        testable.  Whether the declared envelope holds for *all* sequences
        rather than almost all is a modeling assumption the artifact cannot
        check.

Everything here reports brackets or flagged estimates, never bare scalars:
a finite computation can spot-check but not certify a limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, EmptyWindow
from .finite_measures import bowen_sn, window_mask
from .maps import MarkovMap
from .numerics import log_sum_exp
from .symbolic import Potential, boundary_ratio, cylinder, shared_table

BOUNDARY_FLAG_THRESHOLD = 0.01


def _safe_ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.inf if num > 0.0 else 0.0
    return num / den


@dataclass(frozen=True)
class WeakGibbsModel:
    """Cylinder-mass model nu with envelope exp(±n·k_n) around exp(S_n phi)."""

    phi: Potential
    mode: str  # "exact" or "declared"
    c: float = 0.0
    gamma: float = 1.0

    def k(self, n: int) -> float:
        """Envelope value k_n."""
        if self.mode == "exact":
            return 0.0
        return self.c / float(n) ** self.gamma


def exact_model(m: MarkovMap, phi: Potential) -> WeakGibbsModel:
    """True Gibbs model (k_n = 0) for a depth-1 weight table on a full shift.

    Raises:
        ConfigError: the potential is not depth-1 locally constant, the
            shift is not full, or the weights do not sum to 1 within 1e-12
            (the measure would not be an exact product measure).
    """
    if phi.kind != "locally_constant" or phi.depth != 1:
        raise ConfigError("exact mode needs a depth-1 locally constant potential")
    if not m.is_full_shift:
        raise ConfigError("exact mode needs a full shift")
    values = np.array([v for _, v in phi.table], dtype=float) - phi.pressure_shift
    total = log_sum_exp(values, None)
    if abs(total) > 1e-12:
        raise ConfigError(
            f"weights sum to exp({total:.3e}), not 1; normalize the potential first"
        )
    return WeakGibbsModel(phi=phi, mode="exact")


def declared_model(
    m: MarkovMap, phi: Potential, c: float, gamma: float
) -> WeakGibbsModel:
    """Weak Gibbs model with asserted envelope k_n = c / n^gamma.

    Raises:
        ConfigError: c < 0 or gamma <= 0 (k_n must decrease to zero).
    """
    if c < 0.0:
        raise ConfigError("envelope constant c must be nonnegative")
    if gamma <= 0.0:
        raise ConfigError("envelope exponent gamma must be positive")
    return WeakGibbsModel(phi=phi, mode="declared", c=float(c), gamma=float(gamma))


def cylinder_mass_bracket(
    model: WeakGibbsModel, m: MarkovMap, word: Sequence[int]
) -> tuple[float, float]:
    """[exp(-n·k_n + inf S_n phi), exp(n·k_n + sup S_n phi)] for one word."""
    word = tuple(word)
    cyl = cylinder(m, word, model.phi)
    n = len(word)
    k = model.k(n)
    lo, hi = cyl.birkhoff_phi
    return (math.exp(-n * k + lo), math.exp(n * k + hi))


def _level_mass_midpoints(
    model: WeakGibbsModel, m: MarkovMap, n: int
) -> np.ndarray:
    arr = shared_table(m, model.phi).level(n)
    k = model.k(n)
    return 0.5 * (np.exp(-n * k + arr.phi_lo) + np.exp(n * k + arr.phi_hi))


@dataclass(frozen=True)
class LocalDimension:
    """Local-dimension evidence along one word prefix.

    `levels` lists the window n = N/2 .. N; `ratio_lo/hi` bracket
    -S_n phi / S_n psi per level and `cesaro` averages their midpoints.
    `mass_dim_bracket` brackets log nu(cylinder) / log diameter at the
    deepest level.  `flagged` marks prefixes that fall too close to a
    cylinder boundary somewhere in the window; their limit may differ from
    the Birkhoff ratio, so the estimate should not be trusted silently.
    """

    word: tuple[int, ...]
    levels: tuple[int, ...]
    ratio_lo: np.ndarray
    ratio_hi: np.ndarray
    cesaro: float
    mass_dim_bracket: tuple[float, float]
    boundary_min: float
    flagged: bool


def local_dimension(
    model: WeakGibbsModel,
    m: MarkovMap,
    word: Sequence[int],
    *,
    flag_threshold: float = BOUNDARY_FLAG_THRESHOLD,
) -> LocalDimension:
    """Local-dimension estimate along a word prefix of depth N >= 4.

    Raises:
        ValueError: word shorter than 4 symbols or inadmissible.
        DegenerateCylinder: the deepest cylinder underflows.
    """
    word = tuple(word)
    big_n = len(word)
    if big_n < 4:
        raise ValueError("local dimension needs a word of depth at least 4")
    levels = tuple(range(big_n // 2, big_n + 1))
    ratio_lo = np.empty(len(levels))
    ratio_hi = np.empty(len(levels))
    deep = cylinder(m, word, model.phi)
    x = 0.5 * (deep.interval[0] + deep.interval[1])
    boundary_min = math.inf
    for i, n in enumerate(levels):
        cyl = cylinder(m, word[:n], model.phi) if n < big_n else deep
        p_lo, p_hi = cyl.birkhoff_phi
        s_lo, s_hi = cyl.birkhoff_psi
        # s_lo = 0 happens on all-neutral prefixes of parabolic maps; the
        # ratio is unbounded there and the bracket top is honestly infinite.
        combos = [
            _safe_ratio(-p_lo, s_lo),
            _safe_ratio(-p_lo, s_hi),
            _safe_ratio(-p_hi, s_lo),
            _safe_ratio(-p_hi, s_hi),
        ]
        ratio_lo[i], ratio_hi[i] = min(combos), max(combos)
        boundary_min = min(boundary_min, boundary_ratio(m, word[:n], x))
    mass_lo, mass_hi = cylinder_mass_bracket(model, m, word)
    log_d = math.log(deep.diameter)
    combos = [
        (math.log(mass_lo) if mass_lo > 0.0 else -math.inf) / log_d,
        (math.log(mass_hi) if mass_hi > 0.0 else -math.inf) / log_d,
    ]
    return LocalDimension(
        word=word,
        levels=levels,
        ratio_lo=ratio_lo,
        ratio_hi=ratio_hi,
        cesaro=float(np.mean(0.5 * (ratio_lo + ratio_hi))),
        mass_dim_bracket=(min(combos), max(combos)),
        boundary_min=boundary_min,
        flagged=boundary_min < flag_threshold,
    )


def sample_points(
    model: WeakGibbsModel,
    m: MarkovMap,
    count: int,
    depth: int,
    seed: int,
) -> np.ndarray:
    """Draw `count` words of length `depth` from the cylinder-mass model.

    Symbols are drawn left to right with conditional probabilities
    proportional to the child cylinders' mass midpoints.  Randomness comes
    from one generator stream per sample, spawned from the seed, so results
    are reproducible and independent of chunking.

    Returns:
        int array of shape (count, depth).
    """
    table = shared_table(m, model.phi)
    mass = [None] + [_level_mass_midpoints(model, m, n) for n in range(1, depth + 1)]
    arrs = [None] + [table.level(n) for n in range(1, depth + 1)]

    # Children of a word are consecutive rows at the next level (lex order),
    # one per allowed next symbol in ascending order.
    deg = m.transition.sum(axis=1).astype(np.int64)
    max_deg = int(deg.max())
    offsets = []
    for n in range(1, depth):
        d = deg[arrs[n].last]
        start = np.concatenate(([0], np.cumsum(d)[:-1]))
        offsets.append(start)

    uniforms = np.empty((count, depth))
    root = np.random.SeedSequence(seed)
    for i, child in enumerate(root.spawn(count)):
        uniforms[i] = np.random.default_rng(child).random(depth)

    words = np.empty((count, depth), dtype=np.int64)
    # Level 1: categorical over first symbols.
    w1 = mass[1] / mass[1].sum()
    cum = np.cumsum(w1)
    rows = np.searchsorted(cum, uniforms[:, 0] * cum[-1], side="right")
    rows = np.minimum(rows, len(w1) - 1)
    words[:, 0] = arrs[1].last[rows]
    for t in range(1, depth):
        base = offsets[t - 1][rows]
        d = deg[arrs[t].last[rows]]
        idx = base[:, None] + np.arange(max_deg)[None, :]
        valid = np.arange(max_deg)[None, :] < d[:, None]
        w = np.where(valid, mass[t + 1][np.minimum(idx, len(mass[t + 1]) - 1)], 0.0)
        cum = np.cumsum(w, axis=1)
        u = uniforms[:, t] * cum[:, -1]
        choice = (cum < u[:, None]).sum(axis=1)
        choice = np.minimum(choice, d - 1)
        rows = base + choice
        words[:, t] = arrs[t + 1].last[rows]
    return words


@dataclass(frozen=True)
class CoarseSpectrum:
    """Windowed box-counting shadow of the spectrum at one level.

    `s_values` holds the windowed root per grid alpha, NaN where the window
    caught no cylinder; `counts` the window sizes.
    """

    level: int
    eps: float
    alphas: np.ndarray
    s_values: np.ndarray
    counts: np.ndarray


def coarse_spectrum(
    model: WeakGibbsModel,
    m: MarkovMap,
    n: int,
    alphas: Sequence[float] | np.ndarray,
    eps: float,
    *,
    threads: int | None = None,
) -> CoarseSpectrum:
    """Windowed roots over an alpha grid; empty windows are marked absent."""
    alphas = np.asarray(alphas, dtype=float)
    s_values = np.full(alphas.shape, math.nan)
    counts = np.zeros(alphas.shape, dtype=np.int64)
    for i, alpha in enumerate(alphas):
        try:
            s_values[i] = bowen_sn(m, model.phi, n, float(alpha), eps, threads=threads)
        except EmptyWindow:
            continue
        counts[i] = int(np.sum(window_mask(m, model.phi, n, float(alpha), eps)))
    return CoarseSpectrum(
        level=n, eps=eps, alphas=alphas, s_values=s_values, counts=counts
    )
