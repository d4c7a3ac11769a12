"""Order-zero Bessel and Hankel functions for complex arguments.

Three evaluation regimes are used for H0^(1):

* ascending series for |z| <= SERIES_RADIUS (|z| <= 2 when arg z >= pi/4),
* the Hankel integral  h0(z) = sqrt(2/(pi z)) e^{-i pi/4} / sqrt(pi)
  * int exp(-v^2) (1 + i v^2/(2z))^{-1/2} dv  by Gauss-Hermite,
  for SERIES_RADIUS < |z| <= ASYMPTOTIC_RADIUS,
* the Hankel asymptotic expansion above ASYMPTOTIC_RADIUS.

The last two deliver the phase-extracted h0(z) = exp(-iz) H0^(1)(z)
directly, so nothing overflows when Im z is large.  Arguments in the lower
half plane are routed through the series or the reflection formulas, since
the integral representation degenerates as arg z -> -pi/2.
"""

from __future__ import annotations

import math

import numpy as np

from .gaussrules import hermite_rule

EULER_GAMMA = 0.57721566490153286061

SERIES_RADIUS = 4.0
ASYMPTOTIC_RADIUS = 25.0
_LOWER_SERIES_RADIUS = 25.0
_HANKEL_INT_NODES = 80
_ASYM_MAX_TERMS = 60

_TWO_OVER_PI = 2.0 / math.pi


class DomainError(ValueError):
    """Argument outside the principal domain z != 0, |arg z| < pi."""


def _as_complex(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _check_domain(z):
    bad = (z == 0) | ((z.imag == 0) & (z.real < 0)) | ~np.isfinite(z)
    if np.any(bad):
        raise DomainError(f"z must be finite, nonzero and off the negative real axis; got {z[bad][0]}")


# -- ascending series -------------------------------------------------------

def _series_j0y0(z):
    """J0 and Y0 from the ascending series (harmonic-number form of Y0)."""
    if z.size == 0:
        return z.copy(), z.copy()
    q = -0.25 * z * z
    kmax = int(np.max(np.abs(z))) + 30
    term = np.ones_like(z)
    j0 = np.ones_like(z)
    ysum = np.zeros_like(z)
    harm = 0.0
    for k in range(1, kmax + 1):
        term = term * q / (k * k)
        harm += 1.0 / k
        j0 = j0 + term
        ysum = ysum - harm * term
    y0 = _TWO_OVER_PI * ((np.log(0.5 * z) + EULER_GAMMA) * j0 + ysum)
    return j0, y0


# -- large-argument forms (phase extracted) --------------------------------

def _h0_integral(z):
    rule = hermite_rule(_HANKEL_INT_NODES)
    half = rule.nodes > 0
    v2 = rule.nodes[half] ** 2
    w = 2.0 * rule.weights[half]
    # integrand is even in v: use the positive half with doubled weights
    integrand = (1.0 + 1j * v2[None, :] / (2.0 * z[:, None])) ** -0.5
    total = integrand @ w
    return np.sqrt(_TWO_OVER_PI / z) * np.exp(-0.25j * math.pi) / math.sqrt(math.pi) * total


def _h0_asymptotic(z):
    acc = np.ones_like(z)
    term = np.ones_like(z)
    last = np.full(z.shape, np.inf)
    live = np.ones(z.shape, dtype=bool)
    for k in range(1, _ASYM_MAX_TERMS):
        # a_k(0) i^k / z^k with a_k(0) = (-1)^k ((2k-1)!!)^2 / (k! 8^k)
        term = term * (-((2 * k - 1) ** 2)) * 1j / (8.0 * k * z)
        mag = np.abs(term)
        live &= mag < last
        if not live.any():
            break
        acc = np.where(live, acc + term, acc)
        last = np.where(live, mag, last)
        live &= mag > 1e-17 * np.abs(acc)
        if not live.any():
            break
    return np.sqrt(_TWO_OVER_PI / z) * np.exp(-0.25j * math.pi) * acc


def _h0_large(z):
    out = np.empty_like(z)
    big = np.abs(z) > ASYMPTOTIC_RADIUS
    if big.any():
        out[big] = _h0_asymptotic(z[big])
    if (~big).any():
        out[~big] = _h0_integral(z[~big])
    return out


# -- H0^(1) on the principal domain ------------------------------------------

def _hankel1_core(z):
    """(H0^(1)(z), h0(z)) for 1-d arrays already checked against the domain."""
    h1 = np.empty_like(z)
    h0 = np.empty_like(z)
    r = np.abs(z)
    ang = np.angle(z)

    # near the positive imaginary axis the series cancels badly (J0, Y0 grow
    # like e^{|Im z|} while H0^(1) decays); the integral is accurate there
    small = (r <= SERIES_RADIUS) & ~((r > 2.0) & (ang >= 0.25 * math.pi))
    upper = ~small & (ang >= -0.25 * math.pi)
    mid_lower = ~small & ~upper & (ang >= -0.5 * math.pi)
    reflect = ~small & (ang < -0.5 * math.pi)

    if small.any():
        j, y = _series_j0y0(z[small])
        h1[small] = j + 1j * y
        h0[small] = np.exp(-1j * z[small]) * h1[small]
    if upper.any():
        h0[upper] = _h0_large(z[upper])
        h1[upper] = np.exp(1j * z[upper]) * h0[upper]
    if mid_lower.any():
        zz = z[mid_lower]
        vals = np.empty_like(zz)
        near = np.abs(zz) <= _LOWER_SERIES_RADIUS
        if near.any():
            j, y = _series_j0y0(zz[near])
            vals[near] = j + 1j * y
        if (~near).any():
            vals[~near] = np.exp(1j * zz[~near]) * _h0_asymptotic(zz[~near])
        h1[mid_lower] = vals
        h0[mid_lower] = np.exp(-1j * zz) * vals
    if reflect.any():
        # z = w e^{-i pi}:  H1(z) = 2 H1(w) + H2(w),  H2(w) = conj(H1(conj w))
        w = -z[reflect]
        h1w, _ = _hankel1_core(w)
        h2w = np.conj(_hankel1_core(np.conj(w))[0])
        h1[reflect] = 2.0 * h1w + h2w
        h0[reflect] = np.exp(-1j * z[reflect]) * h1[reflect]
    return h1, h0


def _wrap(fn, z):
    arr, scalar = _as_complex(z)
    flat = arr.reshape(-1)
    _check_domain(flat)
    res = fn(flat)
    if isinstance(res, tuple):
        out = tuple(r.reshape(arr.shape) for r in res)
        return tuple(complex(r) for r in out) if scalar else out
    res = res.reshape(arr.shape)
    return complex(res) if scalar else res


def _j0y0_flat(z):
    j = np.empty_like(z)
    y = np.empty_like(z)
    small = np.abs(z) <= SERIES_RADIUS
    if small.any():
        j[small], y[small] = _series_j0y0(z[small])
    big = ~small
    if big.any():
        zb = z[big]
        h1 = _hankel1_core(zb)[0]
        h2 = np.conj(_hankel1_core(np.conj(zb))[0])
        jb = 0.5 * (h1 + h2)
        yb = -0.5j * (h1 - h2)
        real_axis = zb.imag == 0
        # exact reality on the positive real axis
        jb = np.where(real_axis, h1.real + 0j, jb)
        yb = np.where(real_axis, h1.imag + 0j, yb)
        j[big], y[big] = jb, yb
    real_axis = (z.imag == 0)
    j = np.where(real_axis, j.real + 0j, j)
    y = np.where(real_axis, y.real + 0j, y)
    return j, y


def j0y0(z):
    """Return (J0(z), Y0(z)), principal branch; z may be a scalar or array."""
    return _wrap(_j0y0_flat, z)


def hankel1_0(z):
    """H0^(1)(z) = J0(z) + i Y0(z)."""
    return _wrap(lambda a: _hankel1_core(a)[0], z)


def h0_scaled(z):
    """Phase-extracted Hankel function exp(-iz) H0^(1)(z)."""
    return _wrap(lambda a: _hankel1_core(a)[1], z)


def h0_branches(z):
    """Evaluate h0 by every applicable branch (diagnostics for crossover checks).

    Returns a dict with keys 'series', 'integral', 'asymptotic'.
    """
    arr, _ = _as_complex(z)
    flat = arr.reshape(-1)
    _check_domain(flat)
    j, y = _series_j0y0(flat)
    return {
        "series": (np.exp(-1j * flat) * (j + 1j * y)).reshape(arr.shape),
        "integral": _h0_integral(flat).reshape(arr.shape),
        "asymptotic": _h0_asymptotic(flat).reshape(arr.shape),
    }
