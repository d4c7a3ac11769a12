import numpy as np
import pytest

from hankel_filon.moments2 import (ContourError, Params2, _coeff_matrix, char_roots_sigma2, compute_sigma2,
                                   g_inverse_on_contour, nsd_moment_sigma2, phase_dg, phase_g,
                                   regime_test_sigma2, regime_threshold_C, tail_sigma2)
from hankel_filon.oracle import reference_sigma2


def test_params_validation():
    for bad in ((0.0, 0.5, 0.3), (10.0, 0.0, 0.3), (10.0, 0.5, 1.0)):
        with pytest.raises(ValueError):
            Params2(*bad)


def test_omega_free_coefficient():
    a = b = 0.5
    n = 7
    c = _coeff_matrix(np.array([n]), Params2(1e-300, a, b))[0]
    assert c[3] == pytest.approx(-24 * a * b + 88 * a * b / 7 - 80 * a * b / 49, rel=1e-12)


def test_phase():
    p = Params2(10.0, 0.2, 0.5)
    assert phase_g(0.0, p) == pytest.approx(0.2j)
    assert abs(phase_dg(0.0, p)) < 1e-15
    assert phase_g(1.0, p) == pytest.approx(1j * (np.sqrt(1 - 0.2 + 0.04) + 0.5))


def test_contour_inverse():
    p = Params2(50.0, 0.5, 0.3)
    assert g_inverse_on_contour(phase_g(-1.0, p), "C-1", p) == -1
    assert g_inverse_on_contour(phase_g(0.0, p), "C0+", p) == 0
    target = phase_g(1.0, p) - 0.1j / 50
    x = g_inverse_on_contour(target, "C1", p)
    assert abs(phase_g(x, p) - target) <= 1e-12
    with pytest.raises(ValueError):
        g_inverse_on_contour(target, "C2", p)
    assert issubclass(ContourError, RuntimeError)


def test_nsd_moments_against_mpmath(frozen):
    p = Params2(15.0, 0.5, 0.3)
    ref = frozen["sigma2_w15_a0.5_b0.3"]
    got = nsd_moment_sigma2([0, 6], p, m_gl=30, m_gh=30)
    assert np.max(np.abs(got - ref[[0, 6]]) / np.abs(ref[[0, 6]])) <= 1e-7


def test_nsd_improves_with_frequency():
    errs = []
    for w in (15.0, 60.0, 200.0):
        p = Params2(w, 0.5, 0.3)
        errs.append(abs(nsd_moment_sigma2([2], p, 4, 4)[0] - reference_sigma2(p, [2])[0]))
    assert errs[0] > errs[1] > errs[2]


def test_table_matches_mpmath(frozen):
    tab = compute_sigma2(Params2(15.0, 0.5, 0.3), 12)
    ref = frozen["sigma2_w15_a0.5_b0.3"]
    assert np.max(np.abs(tab.values - ref) / np.abs(ref)) <= 1e-7


def test_regime_test():
    assert regime_test_sigma2(Params2(1000.0, 0.5, 0.5), 20) == "forward-safe"
    C = regime_threshold_C(0.5, 0.5)
    p = Params2(85 * C, 0.5, 0.5)
    assert regime_test_sigma2(p, 1000) == "bvp-required"
    with pytest.raises(ValueError):
        regime_test_sigma2(p, 3)


def test_tail():
    p = Params2(100.0, 0.5, 0.5)
    tab = compute_sigma2(p, 2000)
    assert abs(tail_sigma2(2000, p) - tab[2000]) <= 1e-2 * abs(tab[2000])
    assert abs(tail_sigma2(2000, p, terms=2) - tab[2000]) < abs(tail_sigma2(2000, p) - tab[2000])
    # beta -> -beta mirrors x -> -x, so the two endpoint terms trade places
    q = Params2(100.0, 0.5, -0.5)
    assert tail_sigma2(40, q) == pytest.approx(tail_sigma2(40, p), rel=1e-12)
    assert tail_sigma2(41, q) == pytest.approx(-tail_sigma2(41, p), rel=1e-12)


def test_characteristic_roots_pair():
    r = char_roots_sigma2(0.7, 0.4, -0.3)
    assert len(r) == 10
    for z in r:
        assert np.min(np.abs(r - 1 / np.conj(z))) < 1e-9
