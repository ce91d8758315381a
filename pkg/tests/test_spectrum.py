from __future__ import annotations

import math

import numpy as np
import pytest

from dimspectra import (
    NoParabolicOrbit,
    NotStrictlyNegative,
    alpha_of_a,
    b_curve,
    b_of_a,
    dimension_at_infinite_alpha,
    legendre_spectrum,
    locally_constant,
    spectrum_endpoints,
)

LOG2 = math.log(2.0)
ALPHA_MIN_BE = math.log(4.0 / 3.0) / LOG2  # 0.4150374992788438
ALPHA_PEAK_BE = math.log(16.0 / 3.0) / (2.0 * LOG2)  # where f attains 1
ALPHA_FIX_BE = 0.8112781244591328  # f(alpha) = alpha at the measure dimension


def test_b_curve_doubling_uniform(doubling, uniform_phi):
    # P(a psi + b phi) = a log2 - b log2 = 0, so b(a) = 1 + a exactly
    points = b_curve(doubling, uniform_phi, np.linspace(-2.0, 2.0, 9), tol=1e-10)
    for pt in points:
        assert pt.b == pytest.approx(1.0 + pt.a, abs=1e-10)
        assert pt.lower - 1e-10 <= 1.0 + pt.a <= pt.upper + 1e-10
        assert not pt.on_ray
        assert pt.width <= 1e-10


def test_b_of_a_bernoulli_root_residual(doubling, bernoulli_phi):
    pt = b_of_a(doubling, bernoulli_phi, 1.0, tol=1e-10)
    # closed form pressure: P = a log2 + log((1/4)^b + (3/4)^b)
    assert 2.0 * (0.25**pt.b + 0.75**pt.b) == pytest.approx(1.0, abs=1e-9)
    assert pt.b == pytest.approx(2.6030478148, abs=1e-8)


def test_positive_potential_rejected(doubling):
    with pytest.raises(NotStrictlyNegative):
        b_of_a(doubling, locally_constant({(0,): 0.5, (1,): 0.5}), 1.0)


def test_alpha_of_a_closed_form(doubling, bernoulli_phi):
    # implicit differentiation at a = -1 gives b' = 2 log2 / log(16/3)
    pt = alpha_of_a(doubling, bernoulli_phi, -1.0, tol=1e-10)
    assert pt.alpha == pytest.approx(math.log(16.0 / 3.0) / (2.0 * LOG2), abs=1e-6)
    assert pt.b_prime == pytest.approx(2.0 * LOG2 / math.log(16.0 / 3.0), abs=1e-6)
    assert pt.alpha * pt.b_prime == pytest.approx(1.0, abs=1e-12)


def test_mp_ray_detection(mp, uniform_phi):
    pt = b_of_a(mp, uniform_phi, -1.5, tol=1e-4, max_level=12)
    assert pt.on_ray
    assert pt.b == 0.0
    assert pt.upper >= 0.0


def test_mp_off_ray_bracket(mp, uniform_phi):
    pt = b_of_a(mp, uniform_phi, 0.0, tol=1e-4, max_level=12)
    assert not pt.on_ray
    # b(0) = 1: the potential is the normalized uniform weight vector
    assert pt.lower <= 1.0 <= pt.upper
    assert pt.b == pytest.approx(1.0, abs=0.05)


def test_endpoints_bernoulli_exact(doubling, bernoulli_phi):
    a_min, a_max, enc_min, enc_max = spectrum_endpoints(
        doubling, bernoulli_phi, level=4
    )
    assert a_min == pytest.approx(ALPHA_MIN_BE, abs=1e-10)
    assert a_max == pytest.approx(2.0, abs=1e-10)
    assert enc_min[0] - 1e-10 <= a_min <= enc_min[1] + 1e-10
    assert enc_max[0] - 1e-10 <= a_max <= enc_max[1] + 1e-10


def test_endpoints_degenerate_uniform(golden, uniform_phi):
    a_min, a_max, _, _ = spectrum_endpoints(golden, uniform_phi, level=4)
    assert a_min == pytest.approx(1.0, abs=1e-9)
    assert a_max == pytest.approx(1.0, abs=1e-9)


def test_endpoints_parabolic_infinite(farey, mp, uniform_phi):
    for m in (farey, mp):
        a_min, a_max, _, enc_max = spectrum_endpoints(m, uniform_phi, level=6)
        assert a_max == math.inf
        assert enc_max == (math.inf, math.inf)
        assert 0.0 < a_min < 1.0


def test_dimension_at_infinite_alpha(mp, farey, doubling):
    assert dimension_at_infinite_alpha(mp) == pytest.approx(1.0, abs=1e-3)
    assert dimension_at_infinite_alpha(farey) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(NoParabolicOrbit):
        dimension_at_infinite_alpha(doubling)


def test_legendre_degenerate_uniform(doubling, uniform_phi):
    curve = legendre_spectrum(doubling, uniform_phi, [1.0], tol=1e-10)
    assert curve.f_values[0] == pytest.approx(1.0, abs=1e-9)
    assert curve.f_lowers[0] <= curve.f_values[0] <= curve.f_uppers[0]
    assert curve.alpha_min == pytest.approx(1.0, abs=1e-9)
    assert curve.alpha_max == pytest.approx(1.0, abs=1e-9)
    # outside the degenerate range the objective is unbounded below
    outside = legendre_spectrum(doubling, uniform_phi, [1.4], tol=1e-10)
    assert outside.f_values[0] < 0.0


def test_legendre_fixed_point(doubling, bernoulli_phi):
    curve = legendre_spectrum(doubling, bernoulli_phi, [ALPHA_FIX_BE], tol=1e-10)
    assert curve.f_values[0] == pytest.approx(ALPHA_FIX_BE, abs=1e-8)
    assert curve.f_lowers[0] <= curve.f_values[0] <= curve.f_uppers[0]


def test_legendre_peak_value(doubling, bernoulli_phi):
    # at the uniform-measure alpha the spectrum attains the full dimension 1
    curve = legendre_spectrum(doubling, bernoulli_phi, [ALPHA_PEAK_BE], tol=1e-10)
    assert curve.f_values[0] == pytest.approx(1.0, abs=1e-8)


def test_curve_rows_align(doubling, bernoulli_phi):
    alphas = [0.6, 0.9, 1.2]
    curve = legendre_spectrum(doubling, bernoulli_phi, alphas, tol=1e-9)
    rows = curve.as_rows()
    assert len(rows) == 3
    for row, alpha in zip(rows, alphas):
        al, f, flo, fup, a, b, blo, bhi = row
        assert al == alpha
        assert flo <= f <= fup
        assert blo <= b <= bhi
        # row is self-consistent: f = alpha * b - a at the minimizer
        assert f == pytest.approx(alpha * b - a, abs=1e-12)
