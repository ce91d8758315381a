from __future__ import annotations

import math

import numpy as np
import pytest

from dimspectra import (
    Branch,
    ContractionViolation,
    MarkovViolation,
    NotTransitive,
    OutOfImage,
    build_map,
    linear_full_branch_map,
    parabolic_exponent,
)

LOG2 = math.log(2.0)


def test_doubling_structure(doubling):
    assert doubling.p == 2
    assert doubling.is_full_shift
    assert not doubling.has_parabolic
    assert doubling.aperiodicity_power == 1
    assert doubling.core_spans == ((0.0, 0.5), (0.5, 1.0))
    assert doubling.log_deriv_bounds() == (LOG2, LOG2)
    assert doubling.word_count(10) == 1024


def test_branch_inverse_round_trip(doubling):
    br = doubling.branches[1]
    assert br.value(0.65) == pytest.approx(0.3)
    assert br.inverse(0.3) == pytest.approx(0.65)
    assert doubling.branches[0].preimage_interval(0.2, 0.6) == pytest.approx(
        (0.1, 0.3)
    )


def test_inverse_outside_image(golden):
    # branch 1 maps onto (0, 1/2) only
    with pytest.raises(OutOfImage):
        golden.branches[1].inverse(0.8)


def test_cantor_gap_domains():
    m = linear_full_branch_map([3.0, 3.0])
    assert m.branches[0].domain == pytest.approx((0.0, 1.0 / 3.0))
    assert m.branches[1].domain == pytest.approx((1.0 / 3.0, 2.0 / 3.0))
    assert sum(b.domain[1] - b.domain[0] for b in m.branches) < 1.0


def test_negative_slope_orientation():
    m = linear_full_branch_map([2.0, -2.0])
    br = m.branches[1]
    assert not br.increasing
    assert br.value(0.5) == pytest.approx(1.0)
    assert br.value(1.0) == pytest.approx(0.0)
    assert br.inverse(0.4) == pytest.approx(0.8)


def test_slope_sum_over_one_rejected():
    with pytest.raises(ValueError):
        linear_full_branch_map([2.0, 1.5])


def test_golden_mean_subshift(golden):
    assert np.array_equal(golden.transition, [[1, 1], [1, 0]])
    assert [golden.word_count(n) for n in range(1, 6)] == [2, 3, 5, 8, 13]
    assert golden.admissible((0, 1, 0, 1))
    assert not golden.admissible((0, 1, 1))
    assert golden.aperiodicity_power == 2
    # repeller core: the 01-cycle pins the spans at 1/3 and 2/3
    assert golden.core_spans[0] == pytest.approx((0.0, 1.0 / 3.0), abs=1e-12)
    assert golden.core_spans[1] == pytest.approx((0.5, 2.0 / 3.0), abs=1e-12)


def test_overlapping_domains_rejected():
    with pytest.raises(MarkovViolation, match="overlap"):
        build_map(
            [
                Branch("linear", (0.0, 0.6), (0.0, 1.0), slope=5.0 / 3.0),
                Branch("linear", (0.5, 1.0), (0.0, 1.0), slope=2.0, offset=-1.0),
            ]
        )


def test_endpoint_mismatch_rejected():
    with pytest.raises(MarkovViolation, match="endpoints"):
        build_map(
            [
                Branch("linear", (0.0, 0.5), (0.0, 1.0), slope=2.0, offset=0.1),
                Branch("linear", (0.5, 1.0), (0.0, 1.0), slope=2.0, offset=-1.0),
            ]
        )


def test_contracting_branch_rejected():
    # Markov-consistent three-branch system whose last branch has |T'| < 1.
    with pytest.raises(ContractionViolation):
        build_map(
            [
                Branch("linear", (0.0, 0.1), (0.0, 1.0), slope=10.0),
                Branch("linear", (0.1, 0.2), (0.0, 1.0), slope=10.0, offset=-1.0),
                Branch("linear", (0.2, 1.0), (0.0, 0.1), slope=0.125, offset=-0.025),
            ]
        )


def test_reducible_system_rejected():
    # two doubling copies that never communicate
    with pytest.raises(NotTransitive):
        build_map(
            [
                Branch("linear", (0.0, 0.25), (0.0, 0.5), slope=2.0),
                Branch("linear", (0.25, 0.5), (0.0, 0.5), slope=2.0, offset=-0.5),
                Branch("linear", (0.5, 0.75), (0.5, 1.0), slope=2.0, offset=-0.5),
                Branch("linear", (0.75, 1.0), (0.5, 1.0), slope=2.0, offset=-1.0),
            ]
        )


def test_transition_contradicting_images_rejected(golden):
    with pytest.raises(MarkovViolation, match="contradicts"):
        build_map(golden.branches, transition=[[1, 1], [1, 1]])


def test_mp_parabolic_orbit(mp):
    assert mp.has_parabolic
    orbit = mp.parabolic_orbits[0]
    assert orbit.word == (0,)
    assert orbit.points[0] == pytest.approx(0.0, abs=1e-12)
    assert orbit.multiplier == pytest.approx(1.0, abs=1e-12)
    # T(x) = x + x^(1+s): |T'| - 1 = (1+s) x^s, so beta = s exactly
    assert orbit.analytic
    assert orbit.beta == pytest.approx(0.5, abs=1e-12)
    assert mp.parabolic_symbols() == frozenset({0})


def test_mp_split_point(mp):
    # branch boundary solves x + x^(3/2) = 1
    split = mp.branches[0].domain[1]
    assert split + split**1.5 - 1.0 == pytest.approx(0.0, abs=1e-12)


def test_parabolic_exponent_fit(mp, farey):
    fit = parabolic_exponent(mp, mp.parabolic_orbits[0])
    assert fit.beta == pytest.approx(0.5, abs=1e-6)
    assert fit.L == pytest.approx(1.5, abs=1e-6)
    assert fit.residual < 1e-3
    assert fit.analytic_beta == 0.5
    # Farey: T'(x) = 1/(1-x)^2 near 0, so |T'| - 1 ~ 2x
    ffit = parabolic_exponent(farey, farey.parabolic_orbits[0])
    assert ffit.beta == pytest.approx(1.0, abs=1e-3)
    assert ffit.L == pytest.approx(2.0, abs=1e-3)


def test_farey_orbit_detected(farey):
    orbit = farey.parabolic_orbits[0]
    assert orbit.word == (0,)
    assert orbit.beta == pytest.approx(1.0, abs=1e-9)
    assert farey.is_full_shift


def test_hyperbolic_maps_have_no_orbit(doubling, golden, two_slopes):
    for m in (doubling, golden, two_slopes):
        assert m.parabolic_orbits == ()
