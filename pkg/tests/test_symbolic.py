from __future__ import annotations

import math

import numpy as np
import pytest

from dimspectra import (
    InadmissibleSupport,
    PointOutsideCylinder,
    boundary_ratio,
    cylinder,
    distortion_report,
    geometric,
    locally_constant,
    pointwise,
    shared_table,
    validate_potential,
    words_at_level,
)
from dimspectra.errors import LevelTooLarge

LOG2 = math.log(2.0)


def test_locally_constant_validation():
    with pytest.raises(ValueError, match="depth"):
        locally_constant({(0, 1): 0.0, (1,): 1.0})
    with pytest.raises(ValueError):
        locally_constant({}, depth=1)


def test_potential_bounds(doubling, bernoulli_phi):
    assert bernoulli_phi.bounds(doubling) == (math.log(0.25), math.log(0.75))
    geo = geometric(-1.0)
    assert geo.bounds(doubling) == (-LOG2, -LOG2)
    shifted = bernoulli_phi.shifted_by(0.5)
    lo, hi = shifted.bounds(doubling)
    assert lo == pytest.approx(math.log(0.25) - 0.5)
    assert hi == pytest.approx(math.log(0.75) - 0.5)


def test_validate_potential_missing_word(golden):
    with pytest.raises(InadmissibleSupport):
        validate_potential(golden, locally_constant({(0,): 0.0}))


def test_validate_pointwise_count(doubling):
    with pytest.raises(ValueError):
        validate_potential(doubling, pointwise((np.negative,)))


def test_words_at_level_order_and_admissibility(golden):
    words = list(words_at_level(golden, 3))
    assert words == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 0, 1)]
    assert all(golden.admissible(w) for w in words)


def test_words_at_level_budget(doubling):
    with pytest.raises(LevelTooLarge):
        list(words_at_level(doubling, 8, budget=100))


def test_cylinder_dyadic_exact(doubling, bernoulli_phi):
    cyl = cylinder(doubling, (0, 1, 1), bernoulli_phi)
    assert cyl.interval == (0.375, 0.5)
    assert cyl.diameter == 0.125
    # constant log-derivative and depth-1 potential: degenerate brackets
    assert cyl.birkhoff_psi == pytest.approx((3 * LOG2, 3 * LOG2), abs=1e-14)
    truth = math.log(9.0 / 64.0)
    assert cyl.birkhoff_phi == pytest.approx((truth, truth), abs=1e-14)


def test_cylinder_terminal_restriction(doubling):
    cyl = cylinder(doubling, (0,), terminal=(0.5, 1.0))
    assert cyl.interval == pytest.approx((0.25, 0.5), abs=1e-15)


def test_cylinder_nesting(doubling, bernoulli_phi):
    outer = cylinder(doubling, (0, 1), bernoulli_phi)
    inner = cylinder(doubling, (0, 1, 1), bernoulli_phi)
    assert outer.interval[0] <= inner.interval[0]
    assert inner.interval[1] <= outer.interval[1]


def test_cylinder_lives_on_core(golden):
    # from symbol 1 only 0 is allowed, so (1,) and (1, 0) span the same set
    one = cylinder(golden, (1,))
    one_zero = cylinder(golden, (1, 0))
    assert one.interval == pytest.approx(one_zero.interval, abs=1e-12)
    assert one.interval[1] == pytest.approx(2.0 / 3.0, abs=1e-9)


def test_level_arrays_contents(doubling, bernoulli_phi):
    arr = shared_table(doubling, bernoulli_phi).level(3)
    assert arr.count == 8
    assert np.allclose(arr.diameters(), 0.125)
    assert np.allclose(arr.psi_lo, 3 * LOG2)
    assert np.allclose(arr.psi_hi, 3 * LOG2)
    # lexicographic rows: word k occupies [k/8, (k+1)/8]
    assert np.allclose(arr.lo, np.arange(8) / 8.0)
    ones = np.array([bin(k).count("1") for k in range(8)])
    assert np.allclose(
        arr.phi_lo, (3 - ones) * math.log(0.25) + ones * math.log(0.75)
    )


def test_combined_sign_handling(doubling, bernoulli_phi):
    arr = shared_table(doubling, bernoulli_phi).level(3)
    f_lo, f_hi = arr.combined(-1.2, 0.7)
    assert np.allclose(f_lo, -1.2 * arr.psi_hi + 0.7 * arr.phi_lo)
    assert np.allclose(f_hi, -1.2 * arr.psi_lo + 0.7 * arr.phi_hi)
    assert np.all(f_lo <= f_hi + 1e-15)


def test_combined_needs_phi(doubling):
    arr = shared_table(doubling, None).level(2)
    with pytest.raises(ValueError):
        arr.combined(1.0, 0.5)


def test_shared_table_is_cached(doubling, bernoulli_phi, uniform_phi):
    assert shared_table(doubling, bernoulli_phi) is shared_table(
        doubling, bernoulli_phi
    )
    assert shared_table(doubling, bernoulli_phi) is not shared_table(
        doubling, uniform_phi
    )


def test_boundary_ratio(doubling):
    # cylinder (0, 1) is [1/4, 1/2]; x = 0.3 sits 0.05 above the lower edge
    assert boundary_ratio(doubling, (0, 1), 0.3) == pytest.approx(0.2)
    with pytest.raises(PointOutsideCylinder):
        boundary_ratio(doubling, (0, 1), 0.6)


def test_distortion_report_parabolic(mp, uniform_phi):
    rep = distortion_report(mp, uniform_phi, 6)
    assert rep.level == 6
    assert rep.K_psi > 0.0  # nonlinear branches distort
    assert rep.K_phi == 0.0  # depth-1 locally constant is exact
    assert rep.rho == rep.K_psi
    rep2 = distortion_report(mp, uniform_phi, 6, k_n=rep.K_psi + 1.0)
    assert rep2.rho == rep.K_psi + 1.0


def test_distortion_zero_for_linear(doubling, bernoulli_phi):
    rep = distortion_report(doubling, bernoulli_phi, 5)
    assert rep.K_psi == pytest.approx(0.0, abs=1e-13)
    assert rep.K_phi == pytest.approx(0.0, abs=1e-13)
