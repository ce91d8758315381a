from __future__ import annotations

import math

import numpy as np
import pytest

from dimspectra import (
    ConstraintInfeasible,
    EmptyWindow,
    InadmissibleSupport,
    block_measure,
    block_objective,
    bowen_sn,
    connector_length,
    moran_weights,
    optimize_block_weights,
    spread_to_shift_invariant,
    window_mask,
    window_weights,
)
from dimspectra.symbolic import words_at_level

LOG2 = math.log(2.0)
ALPHA_PEAK = math.log(16.0 / 3.0) / (2.0 * LOG2)
ALPHA_FIX = 0.8112781244591328


def binary_entropy(t: float) -> float:
    return -t * math.log(t) - (1.0 - t) * math.log(1.0 - t)


def test_connector_full_shift(doubling):
    con = connector_length(doubling, 3)
    assert con.k == 0
    assert con.excluded == 0
    assert bool(con.eligible.all())
    assert con.join((0, 0, 1), (1, 0, 1)) == (0, 0, 1, 1, 0, 1)


def test_connector_golden_mean(golden):
    # gluing ...1 to 1... needs one symbol: 1-0-1
    con = connector_length(golden, 2)
    assert con.k == 1
    assert con.words[(1, 1)] == (0,)
    assert con.join((0, 1), (0, 0)) == (0, 1, 0, 0, 0)
    glued = con.join((0, 1), (1, 0))
    assert golden.admissible(glued)


def test_connector_excludes_neutral_word(mp):
    # the all-parabolic word has no positive expansion bracket
    con = connector_length(mp, 4)
    assert con.k == 0
    assert con.excluded == 1
    assert not con.eligible[0]  # lexicographically first word is 0000


def test_block_measure_uniform_golden(golden, uniform_phi):
    bm = block_measure(
        golden, uniform_phi, 2, {(0, 0): 1 / 3, (0, 1): 1 / 3, (1, 0): 1 / 3}
    )
    assert bm.entropy == pytest.approx(math.log(3.0), abs=1e-12)
    assert bm.connector_k == 1
    # Abramov: the spread measure has period n + k = 3
    assert bm.spread_entropy == pytest.approx(math.log(3.0) / 3.0, abs=1e-12)
    assert bm.lyapunov_bracket == pytest.approx((LOG2, LOG2), abs=1e-13)
    assert bm.alpha_bracket == pytest.approx((1.0, 1.0), abs=1e-13)
    dim = math.log(3.0) / (3.0 * LOG2)
    assert bm.spread_dim_bracket[0] == pytest.approx(dim, abs=1e-9)
    # crude uniform bound: k*L/(n+k) + rho with L = log 2 here
    assert bm.lemma_bar == pytest.approx(LOG2 / 3.0 + bm.rho, abs=1e-12)


def test_block_measure_rejections(doubling, golden, mp, bernoulli_phi, uniform_phi):
    with pytest.raises(ConstraintInfeasible):
        block_measure(doubling, bernoulli_phi, 2, [0.5, 0.5, 0.5, 0.5])
    with pytest.raises(ConstraintInfeasible):
        block_measure(doubling, bernoulli_phi, 2, [-0.5, 0.5, 0.5, 0.5])
    with pytest.raises(InadmissibleSupport):
        block_measure(golden, uniform_phi, 2, {(1, 1): 1.0})
    # weight on the neutral-orbit word: gluing it is not expanding
    with pytest.raises(InadmissibleSupport):
        block_measure(mp, uniform_phi, 4, {(0, 0, 0, 0): 1.0})


def test_disjoint_mixture_entropy_identity(doubling, bernoulli_phi):
    p = {(0, 0): 0.5, (0, 1): 0.5}
    q = {(1, 0): 0.25, (1, 1): 0.75}
    lam = 0.3
    mix = {w: lam * v for w, v in p.items()}
    mix.update({w: (1 - lam) * v for w, v in q.items()})
    bp = block_measure(doubling, bernoulli_phi, 2, p)
    bq = block_measure(doubling, bernoulli_phi, 2, q)
    bmix = block_measure(doubling, bernoulli_phi, 2, mix)
    expected = lam * bp.entropy + (1 - lam) * bq.entropy + binary_entropy(lam)
    assert bmix.entropy == pytest.approx(expected, abs=1e-12)
    assert bmix.entropy >= lam * bp.entropy + (1 - lam) * bq.entropy


def test_optimizer_recovers_uniform_peak(doubling, bernoulli_phi):
    bm = optimize_block_weights(doubling, bernoulli_phi, 6, ALPHA_PEAK)
    assert block_objective(bm) == pytest.approx(1.0, abs=1e-10)
    assert np.max(np.abs(bm.weights - 1.0 / 64.0)) < 1e-10


def test_optimizer_recovers_bernoulli_product(doubling, bernoulli_phi):
    bm = optimize_block_weights(doubling, bernoulli_phi, 6, ALPHA_FIX)
    assert block_objective(bm) == pytest.approx(
        binary_entropy(0.25) / LOG2, abs=1e-10
    )
    words = list(words_at_level(doubling, 6))
    i = words.index((0, 1, 1, 0, 1, 0))
    assert bm.weights[i] == pytest.approx(0.25**3 * 0.75**3, abs=1e-12)


def test_optimizer_infeasible_alpha(doubling, bernoulli_phi):
    # ratios on the full 2-shift stay within [alpha_min, 2]
    with pytest.raises(ConstraintInfeasible):
        optimize_block_weights(doubling, bernoulli_phi, 6, 3.0)


def test_moran_weights_doubling(doubling):
    bm, s_n = moran_weights(doubling, None, 4)
    assert s_n == pytest.approx(1.0, abs=1e-10)
    assert np.isclose(bm.weights.sum(), 1.0)


def test_moran_weights_cantor_bias_shrinks(two_slopes):
    # terminal span widths bias the level root by O(1/n)
    truth = math.log((1.0 + math.sqrt(5.0)) / 2.0) / LOG2
    _, s3 = moran_weights(two_slopes, None, 3)
    bm6, s6 = moran_weights(two_slopes, None, 6)
    assert abs(s3 - truth) < 0.1
    assert abs(s6 - truth) < abs(s3 - truth)
    lo, hi = bm6.spread_dim_bracket
    assert abs(0.5 * (lo + hi) - truth) < 1e-2


def test_window_mask_and_uniform_root(doubling, uniform_phi):
    mask = window_mask(doubling, uniform_phi, 8, 1.0, 0.05)
    assert int(mask.sum()) == 256
    assert bowen_sn(doubling, uniform_phi, 8, 1.0, 0.05) == pytest.approx(
        1.0, abs=1e-10
    )


def test_bowen_sn_single_word_window(doubling, bernoulli_phi):
    # only the all-zeros word attains ratio 2
    assert bowen_sn(doubling, bernoulli_phi, 6, 2.0, 1e-6) == 0.0


def test_bowen_sn_empty_window(doubling, bernoulli_phi):
    with pytest.raises(EmptyWindow):
        bowen_sn(doubling, bernoulli_phi, 6, 5.0, 0.01)


def test_bowen_sn_monotone_in_eps(doubling, bernoulli_phi):
    s_narrow = bowen_sn(doubling, bernoulli_phi, 8, ALPHA_FIX, 0.02)
    s_wide = bowen_sn(doubling, bernoulli_phi, 8, ALPHA_FIX, 0.06)
    assert s_narrow <= s_wide + 1e-12
    # frozen count: the 0.05 window at level 8 catches the 28 two-zero words
    assert s_narrow == pytest.approx(math.log(28.0) / (8.0 * LOG2), abs=1e-10)


def test_window_weights_are_suboptimal(doubling, bernoulli_phi):
    ww, s_n = window_weights(doubling, bernoulli_phi, 8, ALPHA_FIX, 0.05)
    assert s_n == pytest.approx(bowen_sn(doubling, bernoulli_phi, 8, ALPHA_FIX, 0.05))
    opt = optimize_block_weights(doubling, bernoulli_phi, 8, ALPHA_FIX)
    assert block_objective(ww) <= block_objective(opt) + 1e-9
    mask = window_mask(doubling, bernoulli_phi, 8, ALPHA_FIX, 0.05)
    assert not np.any((ww.weights > 0) & ~mask)


def test_spread_stats_mirror_block(golden, uniform_phi):
    bm = block_measure(
        golden, uniform_phi, 2, {(0, 0): 0.5, (0, 1): 0.25, (1, 0): 0.25}
    )
    st = spread_to_shift_invariant(bm)
    assert st.entropy == bm.spread_entropy
    assert st.lyapunov_bracket == bm.spread_lyapunov_bracket
    assert st.phi_avg_bracket == bm.spread_phi_bracket
    assert st.alpha_bracket == bm.spread_alpha_bracket
    assert st.dim_bracket == bm.spread_dim_bracket
