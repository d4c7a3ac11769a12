"""Slow reference integrators (adaptive Gauss-Kronrod).

The Hankel kernel is evaluated with scipy.special (AMOS), never with this
package's own special functions, so the references are an independent
path.  Integrands may be vector valued: ``amp(x)`` can return an array of
shape (k, len(x)); every component then gets its own relative tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import hankel1

from .gaussrules import laguerre_rule


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class ToleranceSpec:
    abs_tol: float = 1e-15
    rel_tol: float = 1e-12
    max_subdivisions: int = 400_000

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_TOL = ToleranceSpec()

# 15-point Kronrod extension of the 7-point Gauss rule
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_gauss_pos = [1, 3, 5, 7]
for _i, _w in zip(_gauss_pos, _WG):
    _WG15[_i] = _w
    _WG15[14 - _i] = _w


_ROUNDING_FLOOR = 1000 * np.finfo(float).eps


def _gk_panels(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    vals = np.asarray(f(x))
    if not np.all(np.isfinite(vals)):
        raise OracleError("integrand is not finite at a quadrature node")
    scalar = vals.ndim == 1
    vals = vals.reshape((1 if scalar else vals.shape[0], len(a), 15))
    k = (vals @ _WK) * half
    g = (vals @ _WG15) * half
    # Kronrod-Gauss difference, floored at the rounding level of the panel
    absk = (np.abs(vals) @ _WK) * np.abs(half)
    err = np.abs(k - g)
    err = np.where(err <= 50 * np.finfo(float).eps * absk, 0.0, err)
    return k, err, absk, scalar


def adaptive_gk(f, breakpoints, tol: ToleranceSpec = DEFAULT_TOL, return_error=False):
    """Integrate f over [breakpoints[0], breakpoints[-1]] adaptively.

    ``f`` maps a 1-d array of abscissae to values (or to a (k, n) array).
    Panels start at the given breakpoints; while the summed Kronrod-Gauss
    error of some component exceeds its tolerance, every panel carrying
    more than an equal share of that budget is bisected.
    """
    bp = np.asarray(breakpoints, dtype=float)
    a, b = bp[:-1], bp[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    if len(a) == 0:
        return (0.0, 0.0) if return_error else 0.0
    vals, errs, absv, scalar = _gk_panels(f, a, b)
    while True:
        total = vals.sum(axis=1)
        # cancellation floor: no better than rounding of int |f|
        floor = _ROUNDING_FLOOR * absv.sum(axis=1)
        target = np.maximum(np.maximum(tol.abs_tol, tol.rel_tol * np.abs(total)), floor)
        load = errs / target[:, None]
        if np.all(load.sum(axis=1) <= 1.0):
            break
        P = len(a)
        split = np.max(load, axis=0) > 1.0 / P
        if not split.any():
            split = np.max(load, axis=0) >= np.max(load) * 0.5
        if P + int(split.sum()) > tol.max_subdivisions:
            raise OracleError(f"tolerance not met within {tol.max_subdivisions} subdivisions")
        sa, sb = a[split], b[split]
        m = 0.5 * (sa + sb)
        if np.any(m <= sa) or np.any(m >= sb):
            raise OracleError("panel width underflow; integrand not resolvable")
        na, nb = np.concatenate([sa, m]), np.concatenate([m, sb])
        nv, ne, nabs, _ = _gk_panels(f, na, nb)
        absv = np.concatenate([absv[:, ~split], nabs], axis=1)
        a = np.concatenate([a[~split], na])
        b = np.concatenate([b[~split], nb])
        vals = np.concatenate([vals[:, ~split], nv], axis=1)
        errs = np.concatenate([errs[:, ~split], ne], axis=1)
    out = total[0] if scalar else total
    err = errs.sum(axis=1)
    err = err[0] if scalar else err
    return (out, err) if return_error else out


def _uniform_with_dyadic(n_uniform, k_dyadic, left=0.0, right=1.0):
    pts = set(np.linspace(left, right, n_uniform + 1).tolist())
    h = (right - left) / n_uniform
    k = 1
    while 2.0 ** -k * (right - left) > 0 and k <= k_dyadic:
        x = left + (right - left) * 2.0 ** -k
        if x - left < h:
            pts.add(x)
        k += 1
    return np.array(sorted(pts))


_DYADIC_DEPTH = 52


def _log_endpoint_piece(g, delta):
    """int_0^delta g(x) dx via x = delta e^{-u} and 30-point Gauss-Laguerre."""
    rule = laguerre_rule(30)
    x = delta * np.exp(-rule.nodes)
    vals = np.asarray(g(x))
    return delta * (vals @ rule.weights)


def reference_I1(amp, p, tol: ToleranceSpec = DEFAULT_TOL, extra_freq: float = 0.0):
    """int_0^1 amp(x) H0^(1)(omega x) exp(i omega beta x) dx.

    ``extra_freq`` is an additional oscillation rate of the amplitude
    (e.g. Chebyshev degree) used only to size the initial partition.
    """
    omega, beta = float(p.omega), float(p.beta)
    if omega > 500 * (1 + 1e-12):
        raise OracleError("oracle cost guard: omega must be <= 500")

    def g(x):
        return np.asarray(amp(x)) * (hankel1(0, omega * x) * np.exp(1j * omega * beta * x))

    waves = (omega * (1.0 + abs(beta)) + 2.0 * extra_freq) / (2 * math.pi)
    n_uniform = max(10, int(math.ceil(10 * waves)))
    bp = _uniform_with_dyadic(n_uniform, _DYADIC_DEPTH)
    delta = bp[1]
    main = adaptive_gk(g, bp[1:], tol)
    return main + _log_endpoint_piece(g, delta)


def sqrt_q(x, alpha, beta):
    return np.sqrt((x - alpha * beta) ** 2 + alpha ** 2 * (1 - beta ** 2))


def reference_I2(amp, p, tol: ToleranceSpec = DEFAULT_TOL, extra_freq: float = 0.0):
    """int_{-1}^1 amp(x) H0^(1)(omega sqrt(q(x))) exp(i omega beta x) dx."""
    omega, alpha, beta = float(p.omega), float(p.alpha), float(p.beta)
    if omega > 500 * (1 + 1e-12):
        raise OracleError("oracle cost guard: omega must be <= 500")

    def g(x):
        return np.asarray(amp(x)) * (hankel1(0, omega * sqrt_q(x, alpha, beta)) * np.exp(1j * omega * beta * x))

    waves = 2.0 * (omega * (1.0 + abs(beta)) + extra_freq) / (2 * math.pi)
    n_uniform = max(10, int(math.ceil(10 * waves)))
    bp = np.linspace(-1.0, 1.0, n_uniform + 1)
    return adaptive_gk(g, bp, tol)


def cheb_rows(ns, t):
    """T_n(t) for each n in ns via the trigonometric form (rows)."""
    ns = np.asarray(ns)
    th = np.arccos(np.clip(t, -1.0, 1.0))
    return np.cos(ns[:, None] * th[None, :])


def reference_sigma1(p, ns, tol: ToleranceSpec = DEFAULT_TOL):
    """Reference values of int_0^1 T_n(2x-1) H0(omega x) e^{i omega beta x} dx for n in ns."""
    ns = np.atleast_1d(np.asarray(ns, dtype=int))
    return reference_I1(lambda x: cheb_rows(ns, 2 * x - 1), p, tol, extra_freq=float(np.max(ns)))


def reference_sigma2(p, ns, tol: ToleranceSpec = DEFAULT_TOL):
    ns = np.atleast_1d(np.asarray(ns, dtype=int))
    return reference_I2(lambda x: cheb_rows(ns, x), p, tol, extra_freq=float(np.max(ns)))
