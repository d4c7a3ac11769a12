import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hankel_filon.amplitudes import named_amplitude
from hankel_filon.filonq import AmplitudeSpec, exp_moments, fcc_exp, q1, q2
from hankel_filon.moments1 import Params1, compute_sigma1
from hankel_filon.moments2 import Params2, compute_sigma2
from hankel_filon.oracle import reference_I1


def test_constant_amplitude_gives_sigma0():
    p = Params1(20.0, 0.5)
    s0 = compute_sigma1(p, 0)[0]
    for s, nu in ((0, 4), (1, 8), (2, 8)):
        assert q1(named_amplitude("one"), s, nu, p) == pytest.approx(s0, rel=1e-12)
    p2 = Params2(20.0, 0.5, 0.3)
    assert q2(named_amplitude("one", shifted=False), 0, 9, p2) == pytest.approx(compute_sigma2(p2, 0)[0], rel=1e-12)


def test_polynomial_reproduction():
    p = Params1(20.0, 0.5)
    assert q1(named_amplitude("cheb:2"), 0, 8, p) == pytest.approx(compute_sigma1(p, 2)[2], rel=1e-12)
    p2 = Params2(20.0, 0.5, 0.3)
    assert q2(named_amplitude("cheb:3", shifted=False), 0, 9, p2) == pytest.approx(compute_sigma2(p2, 3)[3], rel=1e-12)


def test_demo_value_against_mpmath(frozen):
    p = Params1(100.0, 1.5)
    ref = frozen["I1_demo1_w100_b1.5"]
    e1 = abs(q1(named_amplitude("demo1"), 1, 8, p) - ref)
    e0 = abs(q1(named_amplitude("demo1"), 0, 8, p) - ref)
    assert e1 < 1e-7 and e1 < e0


def test_derivative_order_is_clamped():
    info = {}
    amp = named_amplitude("c2spline")
    q1(amp, 3, 8, Params1(50.0, 0.5), info)
    # too few derivatives: the rule drops to the derivative-free s = 0
    assert info["s"] == 0 and info["s_clamped"] and info["requested_s"] == 3
    with pytest.raises(ValueError):
        q1(amp, -1, 8, Params1(50.0, 0.5))


def test_fcc_exp_closed_forms(frozen):
    one = lambda x: np.ones_like(x)
    w, a, b = 37.0, 0.2, 1.3
    assert fcc_exp(one, 8, w, (a, b)) == pytest.approx((np.exp(1j * w * b) - np.exp(1j * w * a)) / (1j * w), rel=1e-13)
    assert fcc_exp(np.exp, 12, 0.0, (0.0, 1.0)) == pytest.approx(np.e - 1, rel=1e-13)
    assert abs(fcc_exp(np.cos, 24, 40.0) - frozen["fcc_cos_w40"]) <= 1e-10
    assert fcc_exp(one, 4, 5.0, (1.0, 1.0)) == 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 3000.0), st.integers(2, 60))
def test_exp_moments_against_quadrature(c, N):
    mu = exp_moments(c, N)
    t, w = np.polynomial.legendre.leggauss(max(80, int(c) + 80))
    T = np.cos(np.arange(N + 1)[:, None] * np.arccos(t)[None, :])
    ref = T @ (w * np.exp(1j * c * t))
    assert np.max(np.abs(mu - ref)) <= 1e-12


def test_amplitude_spec_scalar_fallback():
    amp = AmplitudeSpec(lambda x: float(x) ** 2)          # not vectorised
    assert np.allclose(amp.values(np.array([1.0, 2.0])), [1, 4])
    assert q1(amp, 0, 6, Params1(30.0, 0.2)) == pytest.approx(reference_I1(lambda x: x * x, Params1(30.0, 0.2)), rel=1e-10)
