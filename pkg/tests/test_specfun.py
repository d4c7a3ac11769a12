import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import hankel1

from hankel_filon.specfun import DomainError, h0_branches, h0_scaled, hankel1_0, j0y0


def test_zero_is_a_domain_error():
    with pytest.raises(DomainError):
        j0y0(0.0)
    with pytest.raises(DomainError):
        hankel1_0(np.array([1.0, 0.0]))


def test_unit_argument(frozen):
    j, y = j0y0(1.0)
    assert abs(j - frozen["j0_1"]) < 1e-14
    assert abs(y - frozen["y0_1"]) < 1e-14
    assert abs(hankel1_0(1.0) - complex(frozen["j0_1"], frozen["y0_1"])) < 1e-14
    assert abs(h0_scaled(1.0) - hankel1_0(1.0) * cmath.exp(-1j)) < 1e-15


def test_large_argument_matches_leading_asymptotics():
    z = 50.0
    j, y = j0y0(z)
    amp = math.sqrt(2 / (math.pi * z))
    assert abs(j - amp * math.cos(z - math.pi / 4)) <= 1e-3
    assert abs(y - amp * math.sin(z - math.pi / 4)) <= 1e-3
    assert abs(abs(hankel1_0(100.0)) * math.sqrt(math.pi * 100 / 2) - 1) <= 1e-3


def test_decay_up_the_imaginary_axis():
    vals = [abs(hankel1_0(1j * t)) for t in (5.0, 10.0, 20.0, 40.0)]
    assert all(b < a * 1e-2 for a, b in zip(vals, vals[1:]))


def test_phase_extracted_envelope():
    assert abs(h0_scaled(200.0)) * math.sqrt(200.0) == pytest.approx(math.sqrt(2 / math.pi), rel=0.05)
    z = 10 + 10j
    assert abs(h0_scaled(z) - cmath.exp(-1j * z) * hankel1_0(z)) <= 1e-10 * abs(h0_scaled(z))


def test_complex_value_pinned(frozen):
    z = hankel1_0(10 + 10j)
    assert abs(z - frozen["h0_10p10i"]) <= 1e-12 * abs(frozen["h0_10p10i"])


@pytest.mark.parametrize("z", [3.5, 3.9, 4.1, 2 + 3j])
def test_series_and_integral_agree_near_their_crossover(z):
    br = h0_branches(z)
    assert abs(br["series"] - br["integral"]) <= 1e-11 * abs(br["integral"])


@pytest.mark.parametrize("z", [24.9, 25.1, 40.0, 20 + 10j])
def test_integral_and_asymptotic_agree_near_their_crossover(z):
    br = h0_branches(z)
    assert abs(br["asymptotic"] - br["integral"]) <= 1e-11 * abs(br["integral"])


def test_array_shape_is_kept():
    z = np.linspace(0.5, 60, 12).reshape(3, 4)
    assert hankel1_0(z).shape == (3, 4)
    assert np.allclose(hankel1_0(z), hankel1(0, z), rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 400.0), st.floats(-0.99, 0.99))
def test_agrees_with_scipy_in_upper_half_plane(r, frac):
    z = r * cmath.exp(1j * math.pi * (frac + 1) / 2 * 0.999)   # arg in (0, pi)
    if z.imag > 600:
        return
    ref = hankel1(0, z)
    got = hankel1_0(z)
    assert abs(got - ref) <= 1e-11 * abs(ref) + 1e-300
