"""Filon-Clenshaw-Curtis rules for the two Hankel-kernel integrals and for e^{i omega x}.

q1 and q2 interpolate the amplitude at Clenshaw-Curtis points (plus
derivative data when available) and integrate the interpolant exactly
against the kernel through the moment tables.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .chebkit import HermiteData, cc_points, idct1, interp_p1, interp_p2
from .moments1 import Params1, compute_sigma1
from .moments2 import Params2, compute_sigma2
from .recsolve import BoundaryConditions, RecurrenceSpec, solve_oliver_bvp


@dataclass(frozen=True)
class AmplitudeSpec:
    """Amplitude f with optional derivatives derivs[j-1] = f^(j)."""

    f: Callable
    derivs: Sequence[Callable] = field(default_factory=tuple)
    smoothness: str | None = None

    def max_s(self):
        return len(self.derivs)

    def values(self, x):
        return _evaluate(self.f, x)

    def deriv_values(self, j, x):
        if j == 0:
            return self.values(x)
        return _evaluate(self.derivs[j - 1], x)


def _evaluate(fn, x):
    x = np.asarray(x, dtype=float)
    try:
        v = np.asarray(fn(x), dtype=complex)
        if v.shape == x.shape:
            return v
    except (TypeError, ValueError):
        pass
    return np.array([complex(fn(float(t))) for t in x.ravel()]).reshape(x.shape)


def _as_amp(amp):
    return amp if isinstance(amp, AmplitudeSpec) else AmplitudeSpec(amp)


def _effective_s(amp, s, info):
    if s < 0:
        raise ValueError("s must be non-negative")
    if s > 0 and amp.max_s() < s:
        if info is not None:
            info["s_clamped"] = True
            info["requested_s"] = s
        return 0
    return s


def q1(amp, s: int, nu: int, p: Params1, info: dict | None = None) -> complex:
    """Q1_[s,nu][f] ~ int_0^1 f(x) H0(omega x) exp(i omega beta x) dx."""
    amp = _as_amp(amp)
    s = _effective_s(amp, s, info)
    x = (cc_points(nu) + 1) / 2
    ends = ()
    if s:
        ends = tuple(np.array([complex(amp.deriv_values(j, np.array([pt]))[0]) for j in range(s + 1)])
                     for pt in (0.0, 1.0))
    coeffs = interp_p1(HermiteData(amp.values(x), ends), s, nu).coeffs
    sigma = compute_sigma1(p, len(coeffs) - 1).values
    if info is not None:
        info["s"] = s
        info["degree"] = len(coeffs) - 1
    return complex(coeffs @ sigma)


def q2(amp, s: int, nu: int, p: Params2, info: dict | None = None) -> complex:
    """Q2_[s,nu][f] ~ int_{-1}^1 f(x) H0(omega sqrt q(x)) exp(i omega beta x) dx; nu odd."""
    if nu % 2 == 0:
        raise ValueError("q2 needs odd nu")
    amp = _as_amp(amp)
    s = _effective_s(amp, s, info)
    x = cc_points(nu)
    ends, mid = (), ()
    if s:
        vals = {pt: np.array([complex(amp.deriv_values(j, np.array([pt]))[0]) for j in range(s + 1)])
                for pt in (-1.0, 0.0, 1.0)}
        ends, mid = (vals[-1.0], vals[1.0]), vals[0.0]
    coeffs = interp_p2(HermiteData(amp.values(x), ends, mid), s, nu).coeffs
    sigma = compute_sigma2(p, len(coeffs) - 1).values
    if info is not None:
        info["s"] = s
        info["degree"] = len(coeffs) - 1
    return complex(coeffs @ sigma)


# -- plain FCC for exp(i omega x) ----------------------------------------------------

_GL_BELOW = 1.0          # use Gauss-Legendre for the moments when c is this small
_TERMINAL_MARGIN = 60
_memo: dict = {}
_memo_lock = threading.Lock()


def _exp_moments_gl(c, N):
    m = N // 2 + 30
    t, w = np.polynomial.legendre.leggauss(m)
    th = np.arccos(t)
    T = np.cos(np.arange(N + 1)[:, None] * th[None, :])
    return T @ (w * np.exp(1j * c * t))


def _three_term_rows(c, n):
    """Rows of  i c mu_{n+1}/(n+1) + 2 mu_n - i c mu_{n-1}/(n-1) = r_n  (generic order 2)."""
    n = np.asarray(n, dtype=float)
    A = np.stack([-1j * c / (n - 1), 2 + 0 * n, 1j * c / (n + 1)], axis=1)
    sgn = np.where(np.mod(n, 2) == 0, -1.0, 1.0)           # (-1)^{n+1}
    B = np.exp(1j * c) - sgn * np.exp(-1j * c)
    r = B * (1 / (n + 1) - 1 / (n - 1))
    return A, r


class _ThreeTerm:
    def __init__(self, c):
        self.c = c

    def block(self, k0, k1):
        return _three_term_rows(self.c, np.arange(k0, k1) + 2)[0]

    def __call__(self, k):
        return self.block(k, k + 1)[0]


def _exp_moments_rec(c, N):
    mu0 = 2 * math.sin(c) / c
    mu1 = 2j * (math.sin(c) - c * math.cos(c)) / c ** 2
    if N <= c:
        mu = np.zeros(max(N + 1, 3), dtype=complex)
        mu[0], mu[1] = mu0, mu1
        mu[2] = mu0 + 4j * mu1 / c
        if N > 2:
            A, r = _three_term_rows(c, np.arange(2, N))
            for i, n in enumerate(range(2, N)):
                mu[n + 1] = (r[i] - A[i, 0] * mu[n - 1] - A[i, 1] * mu[n]) / A[i, 2]
        return mu[: N + 1]
    # above n ~ c forward recursion is unstable: two-point BVP from mu_1 to mu_M,
    # with generic row k the relation at n = k + 2 and unknowns y_i = mu_{i+1}
    M = int(max(N, c)) + _TERMINAL_MARGIN
    sgn = 1.0 if M % 2 == 0 else -1.0
    muM = (np.exp(1j * c) + sgn * np.exp(-1j * c)) / (1 - M * M)
    spec = RecurrenceSpec(2, _ThreeTerm(c))
    _, r = _three_term_rows(c, np.arange(2, M))
    y = solve_oliver_bvp(spec, BoundaryConditions([mu1], [muM]), M - 1, residual_tol=1e-9, rhs=r)
    return np.concatenate([[mu0], y])[: N + 1]


def exp_moments(c: float, N: int) -> np.ndarray:
    """mu_n = int_{-1}^1 T_n(t) exp(i c t) dt for n = 0..N (memoized, read-only)."""
    c = float(c)
    key = (c, int(N))
    with _memo_lock:
        hit = _memo.get(key)
    if hit is not None:
        return hit
    if c < 0:
        mu = np.conj(exp_moments(-c, N))
    elif c == 0:
        n = np.arange(N + 1)
        mu = np.where(n % 2 == 0, 2.0 / (1.0 - n * n + (n == 1)), 0.0).astype(complex)
    elif c < _GL_BELOW:
        mu = _exp_moments_gl(c, N)
    else:
        mu = _exp_moments_rec(c, N)
    mu = np.array(mu, dtype=complex)
    mu.setflags(write=False)
    with _memo_lock:
        _memo.setdefault(key, mu)
    return mu


def fcc_exp(amp, nu: int, omega: float, interval=(0.0, 1.0)) -> complex:
    """Filon-Clenshaw-Curtis approximation of int_a^b f(x) exp(i omega x) dx."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    a, b = map(float, interval)
    if b == a:
        return 0j
    amp = _as_amp(amp)
    half, mid = (b - a) / 2, (a + b) / 2
    x = mid + half * cc_points(nu)
    coeffs = idct1(amp.values(x)).astype(complex)
    coeffs[0] *= 0.5
    coeffs[-1] *= 0.5
    mu = exp_moments(omega * half, nu + 1)
    return complex(half * np.exp(1j * omega * mid) * (coeffs @ mu))
