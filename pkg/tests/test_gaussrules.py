import math

import numpy as np
import pytest
from scipy.special import roots_hermite, roots_laguerre

from hankel_filon.gaussrules import hermite_rule, laguerre_rule


def test_small_hermite_rules():
    r = hermite_rule(1)
    assert r.nodes[0] == 0 and r.weights[0] == pytest.approx(math.sqrt(math.pi))
    r = hermite_rule(2)
    assert np.allclose(r.nodes, [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)
    assert np.allclose(r.weights, math.sqrt(math.pi) / 2, rtol=1e-14)


def test_hermite_moment():
    r = hermite_rule(10)
    assert r.integrate(lambda x: x ** 8) == pytest.approx(105 * math.sqrt(math.pi) / 16, rel=1e-13)


def test_small_laguerre_rules():
    r = laguerre_rule(1)
    assert r.nodes[0] == pytest.approx(1) and r.weights[0] == pytest.approx(1)
    r = laguerre_rule(2)
    assert np.allclose(np.sort(r.nodes), [2 - math.sqrt(2), 2 + math.sqrt(2)], rtol=1e-14)
    assert laguerre_rule(8).integrate(lambda t: t ** 5) == pytest.approx(120, rel=1e-12)


def test_rules_are_frozen_and_cached():
    r = hermite_rule(12)
    assert r is hermite_rule(12)
    with pytest.raises(ValueError):
        r.nodes[0] = 1.0


@pytest.mark.parametrize("m", [0, -3, 2.5])
def test_bad_sizes(m):
    with pytest.raises(ValueError):
        hermite_rule(m)
    with pytest.raises(ValueError):
        laguerre_rule(m)


def test_hermite_symmetry():
    for m in (5, 20, 60):
        r = hermite_rule(m)
        assert np.array_equal(r.nodes, -r.nodes[::-1])
        assert np.all(r.weights > 0)


@pytest.mark.parametrize("m", [3, 20, 60, 200])
def test_against_scipy_including_tiny_weights(m):
    x, w = roots_hermite(m)
    r = hermite_rule(m)
    assert np.max(np.abs(r.nodes - x)) <= 1e-12 * max(1.0, np.max(np.abs(x)))
    assert np.max(np.abs(r.weights - w) / w) <= 1e-11
    x, w = roots_laguerre(m)
    r = laguerre_rule(m)
    ok = w > 1e-300
    assert np.max(np.abs(r.nodes - x) / x) <= 1e-12
    assert np.max(np.abs(r.weights[ok] - w[ok]) / w[ok]) <= 1e-10
