import math

import numpy as np
import pytest

from hankel_filon import scatter2d as S


@pytest.fixture(scope="module")
def small_system():
    return S.assemble(S.build_mesh(2, 4), S.IncidentWave(5.0))


def test_mesh():
    m = S.build_mesh(3, 6)
    assert m.points_plus[1] == pytest.approx(-1 + 2 * 0.3 ** 6, abs=1e-15)
    assert m.points_plus[1] == pytest.approx(-0.998542, abs=1e-6)
    assert m.points_plus[0] == -1 and m.points_plus[-1] == 1
    assert m.J[-1] == 3 - (2 * 3) // 7 + 1
    assert np.all(np.diff(m.points_plus) > 0)
    assert np.allclose(m.points_minus, -m.points_plus[::-1])
    assert m.n_basis == len(m.points_plus) + 2
    with pytest.raises(ValueError):
        S.build_mesh(0, 4)


def test_collocation_points():
    m = S.build_mesh(3, 6)
    ys = S.collocation_points(m, 3 * 2 * m.n_basis)
    assert len(ys) == 3 * 2 * m.n_basis == len(np.unique(ys))
    assert ys.min() >= -1 and ys.max() <= 1
    assert np.all(np.isin(m.points_plus, ys))


def test_classification():
    assert S.classify_entry((0.0, 0.015), 0.5, 100.0) == "nonosc"
    assert S.classify_entry((0.0, 0.5), 0.25, 100.0) == "singular_osc"
    assert S.classify_entry((0.0, 0.5), 0.5 + 0.5e-4, 100.0) == "singular_osc"
    # phases add for e^{+i omega s} when y lies to the left of the support
    assert S.classify_entry((0.0, 0.5), -0.6, 100.0, sign=1) == "nonsingular_osc"
    assert S.classify_entry((0.0, 0.5), -0.6, 100.0, sign=-1) == "nonosc"


def test_incident_wave():
    w = S.IncidentWave(10.0, math.pi / 3)
    assert np.allclose(w.direction, [0.5, -math.sqrt(3) / 2])
    s = np.linspace(-1, 1, 5)
    assert np.allclose(w.go_density(s), -2j * 10 * math.sin(math.pi / 3) * w.trace(s))


def test_assembly_matches_all_oracle_assembly(small_system):
    sysm = small_system
    plus, minus = S._bases(sysm.mesh)
    ref = np.empty_like(sysm.matrix)
    for col, (kind, j, sig) in enumerate(sysm.dof_map):
        basis = (plus if kind == "plus" else minus)[j]
        ref[:, col] = 0.25j * S.oracle_entries(basis, sysm.points, sig, sysm.wave.omega)
    assert set(np.unique(sysm.tags)) >= {1, 2}            # the fast engines were exercised
    assert np.max(np.abs(sysm.matrix - ref)) <= 1e-8 * np.max(np.abs(ref))


def test_solve_recovers_consistent_coefficients(small_system):
    rng = np.random.default_rng(3)
    x = rng.standard_normal(small_system.shape[1]) + 1j * rng.standard_normal(small_system.shape[1])
    synthetic = S.CollocationSystem(**{**small_system.__dict__, "rhs": small_system.matrix @ x})
    sol = S.solve_system(synthetic)
    assert np.linalg.norm(sol.coeffs - x) <= 1e-8 * np.linalg.norm(x)
    zero = S.solve_system(S.CollocationSystem(**{**small_system.__dict__, "rhs": np.zeros(small_system.shape[0])}))
    assert np.all(zero.coeffs == 0) and zero.residual == 0
    assert not sol.rank_deficient and np.isfinite(sol.cond)


def test_rel_l1_error():
    u = lambda s: np.exp(1j * 3 * s) * (1 + s ** 2)
    assert S.rel_l1_error(u, u) == 0
    assert S.rel_l1_error(lambda s: 2 * u(s), u) == pytest.approx(1.0, rel=1e-10)
    with pytest.raises(ValueError):
        S.rel_l1_error(u, lambda s: 0 * s)


def test_go_integral_is_close_to_incident_trace():
    w = S.IncidentWave(200.0)
    assert abs(S.go_integral(w, 0.0) - w.trace(0.0)) < 0.1


@pytest.mark.slow
def test_residual_and_error_decrease_with_p():
    _, ref = S.run_scatter(100.0, 5)
    r3, _ = S.run_scatter(100.0, 3, reference=ref)
    r4, _ = S.run_scatter(100.0, 4, reference=ref)
    assert r4.residual < r3.residual and ref.residual < r4.residual
    assert 0 < r4.rel_l1_vs_ref < r3.rel_l1_vs_ref
    assert r3.dofs == 38
