import numpy as np
import pytest

from hankel_filon.moments1 import (MomentTable, Params1, _coeff_matrix, char_roots_sigma1, compute_sigma1,
                                   cutoff_sigma1, initial_moments_sigma1, rec_coeffs_sigma1, tail_sigma1)
from hankel_filon.recsolve import RecurrenceError


def test_params_validation():
    with pytest.raises(ValueError):
        Params1(0.0, 0.2)
    with pytest.raises(ValueError):
        Params1(10.0, float("nan"))


def test_recurrence_coefficients():
    c = rec_coeffs_sigma1(7, Params1(30.0, 1.0))
    assert c[0] == 0 and c[8] == 0
    assert _coeff_matrix(np.array([4]), 0.0, 0.3)[0][2] == pytest.approx(2.25)
    with pytest.raises(ValueError):
        rec_coeffs_sigma1(0, Params1(30.0, 0.5))


def test_recurrence_closure_at_omega_20(frozen):
    ref = frozen["sigma1_w20_b0"]
    p = Params1(20.0, 0.0)
    for n in range(8, 9):
        c = rec_coeffs_sigma1(n, p)
        assert abs(np.dot(c, ref[n::-1][:9])) <= 1e-10 * np.max(np.abs(ref))


def test_initial_moments(frozen):
    s = initial_moments_sigma1(Params1(20.0, 0.0), m_gh=30)
    ref = frozen["sigma1_w20_b0"]
    assert abs(s[0] - ref[0]) <= 1e-9 * abs(ref[0])
    assert np.max(np.abs(np.array(s) - ref[:4]) / np.abs(ref[:4])) <= 1e-9


def test_unit_beta_continuity(frozen):
    s1 = initial_moments_sigma1(Params1(50.0, 1.0))[0]
    assert abs(s1 - frozen["sigma1_w50_b1"]) <= 1e-10 * abs(s1)
    for b in (1 + 1e-6, 1 - 1e-6):
        assert abs(initial_moments_sigma1(Params1(50.0, b))[0] - s1) <= 1e-4 * abs(s1)


def test_table_matches_mpmath(frozen):
    tab = compute_sigma1(Params1(20.0, 0.5), 16)
    ref = frozen["sigma1_w20_b0.5"]
    assert np.max(np.abs(tab.values - ref) / np.abs(ref)) <= 1e-8


def test_cutoffs():
    assert cutoff_sigma1(Params1(500.0, 1.0)) == 500
    assert cutoff_sigma1(Params1(100.0, 0.0)) == 50
    assert cutoff_sigma1(Params1(100.0, 3.0)) == 100


def test_method_selection():
    short = compute_sigma1(Params1(100.0, 0.0), 40)
    assert [m[0] for m in short.methods] == ["gaussian-ic", "forward"]
    long = compute_sigma1(Params1(100.0, 0.0), 300)
    assert "oliver-bvp" in [m[0] for m in long.methods]
    assert long.method_of(0) == "gaussian-ic" and long.method_of(300) == "oliver-bvp"
    assert long.M >= 300


def test_tail_against_bvp():
    p = Params1(500.0, 1.0)
    tab = compute_sigma1(p, 2000)
    assert abs(tail_sigma1(2000, p) - tab[2000]) <= 1e-2 * abs(tab[2000])
    n = np.array([4000, 8000, 16000])
    lead = np.log(n) * 2j * np.where(n % 2 == 0, 1, -1) / np.pi / n ** 2
    r = tail_sigma1(n, p) / lead
    assert np.all(np.diff(np.abs(r - 1)) < 0)


def test_characteristic_roots():
    roots = char_roots_sigma1(1e4, 0.3)
    assert np.allclose(np.abs(roots), 1.0, atol=1e-10)
    roots = char_roots_sigma1(1.0, 0.0)
    off = roots[np.abs(np.abs(roots) - 1) > 1e-6]
    assert len(off) > 0
    for r in off:       # every root off the circle has its partner 1/conj(r)
        assert np.min(np.abs(off - 1 / np.conj(r))) < 1e-12
    roots, notes = char_roots_sigma1(2.0, 1.0, with_notes=True)
    assert len(roots) == 6 and any("degenerates" in n for n in notes)
    with pytest.raises(ValueError):
        char_roots_sigma1(0.0, 0.5)


def test_table_contract():
    tab = compute_sigma1(Params1(20.0, 0.5), 5)
    with pytest.raises(ValueError):
        tab.values[0] = 1
    text = tab.to_csv(comment="x")
    lines = text.splitlines()
    assert lines[0] == "# x" and lines[1] == "n,re,im,method" and len(lines) == 8
    with pytest.raises(ValueError):
        MomentTable("sigma1", np.ones(3), (("forward", 0, 1),), None)
    with pytest.raises(RecurrenceError):
        MomentTable("sigma1", np.array([1, np.nan]), (("forward", 0, 1),), None)


def test_forward_is_unstable_past_cutoff():
    p = Params1(500.0, 1.0)
    fwd = compute_sigma1(p, 1000, method="forward")
    bvp = compute_sigma1(p, 1000)
    assert abs(fwd[400] - bvp[400]) <= 1e-6 * abs(bvp[400])
    assert abs(fwd[1000] - bvp[1000]) > 1e3 * abs(bvp[1000])
