"""Modified moments sigma_n = int_{-1}^1 T_n(x) H0(omega sqrt(q(x))) exp(i omega beta x) dx,

with q(x) = (x - alpha beta)^2 + alpha^2 (1 - beta^2).  Initial values
come from numerical steepest descent; the rest from a 14-term recurrence,
forward or as a (9, 5) boundary value problem depending on where the
characteristic roots leave the unit circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import hankel1

from .gaussrules import MAX_NODES, hermite_rule, laguerre_rule
from .moments1 import OMEGA_FLOOR, MomentTable, _method_ranges
from .oracle import reference_sigma2
from .recsolve import (BoundaryConditions, RecurrenceError, RecurrenceSpec,
                       forward_propagate, solve_oliver_bvp)
from .specfun import h0_scaled, hankel1_0

CONTOURS = ("C-1", "C0+", "C0-", "C1")
N_INITIAL = 7               # sigma_0..sigma_6 by steepest descent
DEFAULT_EPS = 1e-8
_NEWTON_MAXIT = 50
_NSD_MIN_NODES = 30
_NSD_NODE_SCALE = 110.0     # m ~ scale / kappa^2 keeps exp(-2 kappa sqrt(2m)) < 1e-14


@dataclass(frozen=True)
class Params2:
    omega: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError("omega must be positive and finite")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not abs(self.beta) < 1:
            raise ValueError("beta must lie in (-1, 1)")


class ContourError(RuntimeError):
    def __init__(self, contour, msg):
        super().__init__(f"[{contour}] {msg}")
        self.contour = contour


# -- recurrence -------------------------------------------------------------------

def _coeff_matrix(n, p: Params2):
    """(len(n), 15) array; column l multiplies sigma_{n-l}."""
    n = np.asarray(n, dtype=float)
    a, b, w, I = p.alpha, p.beta, p.omega, 1j
    n1, n2 = 1.0 / n, 1.0 / (n * n)
    a2, a3, b2, b3, b4, w2 = a * a, a ** 3, b * b, b ** 3, b ** 4, w * w
    c = np.empty(n.shape + (15,), dtype=complex)

    def put(l, c0, c1, c2):
        c[..., l] = c0 + c1 * n1 + c2 * n2

    put(0, 0, 0, w2 * (1 - b2))
    put(1, 0, 4 * I * b * w, 6 * a * b3 * w2 - 6 * a * b * w2 - 2 * I * b * w)
    put(2, 4, -24 * I * a * b2 * w - 8,
        -8 * a2 * b4 * w2 + 8 * a2 * b2 * w2 + 32 * I * a * b2 * w + b2 * w2 - w2 + 4)
    put(3, -24 * a * b, 32 * I * a2 * b3 * w + 16 * I * a2 * b * w + 88 * a * b,
        -80 * I * a2 * b3 * w - 24 * I * a2 * b * w - 12 * a * b3 * w2 + 12 * a * b * w2
        - 80 * a * b + 12 * I * b * w)
    put(4, 32 * a2 * b2 + 16 * a2 + 4,
        -32 * I * a3 * b2 * w - 192 * a2 * b2 - 64 * a2 + 24 * I * a * b2 * w + 8,
        96 * I * a3 * b2 * w + 24 * a2 * b4 * w2 - 24 * a2 * b2 * w2 + 288 * a2 * b2 + 48 * a2
        - 144 * I * a * b2 * w + 3 * b2 * w2 - 3 * w2 - 44)
    put(5, -32 * a3 * b,
        224 * a3 * b - 64 * I * a2 * b3 * w - 32 * I * a2 * b * w - 176 * a * b - 12 * I * b * w,
        -384 * a3 * b + 384 * I * a2 * b3 * w + 128 * I * a2 * b * w - 6 * a * b3 * w2
        + 6 * a * b * w2 + 592 * a * b + 58 * I * b * w)
    put(6, -32 * a2 * b2 - 16 * a2 - 8,
        96 * I * a3 * b2 * w + 576 * a2 * b2 + 192 * a2 + 48 * I * a * b2 * w + 128,
        -544 * I * a3 * b2 * w - 16 * a2 * b4 * w2 + 16 * a2 * b2 * w2 - 1952 * a2 * b2
        - 432 * a2 - 224 * I * a * b2 * w - 3 * b2 * w2 + 3 * w2 - 344)
    put(7, 64 * a3 * b + 48 * a * b, -896 * a3 * b - 672 * a * b,
        2880 * a3 * b - 160 * I * a2 * b3 * w + 16 * I * a2 * b * w + 24 * a * b3 * w2
        - 24 * a * b * w2 + 1840 * a * b - 24 * I * b * w)
    put(8, -32 * a2 * b2 - 16 * a2 - 8,
        -96 * I * a3 * b2 * w + 320 * a2 * b2 + 256 * a2 - 48 * I * a * b2 * w + 96,
        800 * I * a3 * b2 * w - 16 * a2 * b4 * w2 + 16 * a2 * b2 * w2 - 160 * a2 * b2
        - 880 * a2 + 448 * I * a * b2 * w - 3 * b2 * w2 + 3 * w2 - 120)
    put(9, -32 * a3 * b,
        672 * a3 * b + 64 * I * a2 * b3 * w + 32 * I * a2 * b * w + 176 * a * b + 12 * I * b * w,
        -3520 * a3 * b - 512 * I * a2 * b3 * w - 320 * I * a2 * b * w - 6 * a * b3 * w2
        + 6 * a * b * w2 - 1872 * a * b - 110 * I * b * w)
    put(10, 32 * a2 * b2 + 16 * a2 + 4,
        32 * I * a3 * b2 * w - 704 * a2 * b2 - 384 * a2 - 24 * I * a * b2 * w - 120,
        -352 * I * a3 * b2 * w + 24 * a2 * b4 * w2 - 24 * a2 * b2 * w2 + 3872 * a2 * b2
        + 2288 * a2 + 192 * I * a * b2 * w + 3 * b2 * w2 - 3 * w2 + 852)
    put(11, -24 * a * b, -32 * I * a2 * b3 * w - 16 * I * a2 * b * w + 584 * a * b,
        368 * I * a2 * b3 * w + 200 * I * a2 * b * w - 12 * a * b3 * w2 + 12 * a * b * w2
        - 3552 * a * b + 12 * I * b * w)
    put(12, 4, 24 * I * a * b2 * w - 104,
        -8 * a2 * b4 * w2 + 8 * a2 * b2 * w2 - 304 * I * a * b2 * w + b2 * w2 - w2 + 676)
    put(13, 0, -4 * I * b * w, 6 * a * b3 * w2 - 6 * a * b * w2 + 54 * I * b * w)
    put(14, 0, 0, w2 * (1 - b2))
    return c


def rec_coeffs_sigma2(n: int, p: Params2) -> np.ndarray:
    """The fifteen coefficients of sigma_n, ..., sigma_{n-14} (divided by n^2)."""
    if n == 0:
        raise ValueError("the recurrence is undefined at n = 0")
    return _coeff_matrix(np.array([n]), p)[0]


class _GenericCoeffs:
    """Row k of the generic form is the relation at n = k + 14."""

    order = 14
    shift = 14

    def __init__(self, p: Params2):
        self.p = p

    def block(self, k0, k1):
        n = np.arange(k0, k1) + self.shift
        return _coeff_matrix(n, self.p)[:, ::-1]

    def __call__(self, k):
        return self.block(k, k + 1)[0]

    def spec(self):
        return RecurrenceSpec(self.order, self)


def _reflected_row(n, p, sig):
    """Solve the relation at n for sigma_n with sigma_{-k} read as sigma_k."""
    c = rec_coeffs_sigma2(n, p)
    lead, acc = 0j, 0j
    for l in range(15):
        idx = abs(n - l)
        if idx == n:
            lead += c[l]
        else:
            acc += c[l] * sig[idx]
    if lead == 0:
        raise RecurrenceError(f"reflected row n={n} has no pivot")
    return -acc / lead


# -- phase geometry --------------------------------------------------------------

@dataclass(frozen=True)
class PhaseGeometry:
    """g(x) = i(sqrt(q(x)) + beta x) with branch points alpha beta +- i c."""

    alpha: float
    beta: float

    @property
    def center(self):
        return self.alpha * self.beta

    @property
    def c(self):
        return self.alpha * math.sqrt(1 - self.beta ** 2)

    def on_cut(self, x):
        x = np.asarray(x, dtype=complex)
        return (np.abs(x.real - self.center) < 1e-14 * (1 + abs(self.center))) & (np.abs(x.imag) > self.c)

    def sqrt_q(self, x):
        # split root: Re >= 0 with cuts running vertically away from the branch points
        w = np.asarray(x, dtype=complex) - self.center
        return np.sqrt(self.c - 1j * w) * np.sqrt(self.c + 1j * w)

    def g(self, x):
        return 1j * (self.sqrt_q(x) + self.beta * np.asarray(x))

    def dg(self, x):
        return 1j * ((np.asarray(x) - self.center) / self.sqrt_q(x) + self.beta)

    def d2g(self, x):
        return 1j * self.c ** 2 / self.sqrt_q(x) ** 3

    @property
    def endpoint_phases(self):
        return complex(self.g(-1.0)), complex(self.g(1.0))


def _geometry(p):
    return PhaseGeometry(p.alpha, p.beta)


def phase_g(x, p: Params2):
    geo = _geometry(p)
    if np.any(geo.on_cut(x)):
        raise ValueError("x lies on a branch cut of the phase")
    return geo.g(x)


def phase_dg(x, p: Params2):
    geo = _geometry(p)
    if np.any(geo.on_cut(x)):
        raise ValueError("x lies on a branch cut of the phase")
    return geo.dg(x)


def _newton(geo, target, x0, contour):
    # stop on the step size relative to |x|: near the saddle g' is small and
    # a residual test alone leaves x (and hence 1/g'(x)) inaccurate
    x = complex(x0)
    for _ in range(_NEWTON_MAXIT):
        r = complex(geo.g(x)) - target
        d = complex(geo.dg(x))
        if d == 0:
            raise ContourError(contour, "vanishing derivative in Newton step")
        step = r / d
        x = x - step
        if not np.isfinite(x):
            raise ContourError(contour, "Newton iterate diverged")
        if abs(step) <= 1e-14 * abs(x):
            break
    r = complex(geo.g(x)) - target
    if abs(r) <= 1e-12 * (1 + abs(target)):
        return x
    raise ContourError(contour, f"Newton did not converge (|residual| = {abs(r):.2e})")


def _seed(geo, target, contour):
    if contour == "C-1" or contour == "C1":
        end = -1.0 if contour == "C-1" else 1.0
        return end + (target - complex(geo.g(end))) / complex(geo.dg(end))
    # g(x) ~ g(0) + g''(0) x^2 / 2 near the saddle
    # g(x) = g(0) - t^2/omega with x ~ t sqrt(-2/(omega g''(0))); C0+ is t > 0
    d2 = complex(geo.d2g(0.0))
    unit = np.sqrt(-2 / d2)
    r = np.sqrt(complex(geo.g(0.0)) - target) * unit
    return r if contour == "C0+" else -r


def g_inverse_on_contour(target, contour: str, p: Params2, seed=None) -> complex:
    """Solve g(x) = target for x on the named steepest-descent branch."""
    if contour not in CONTOURS:
        raise ValueError(f"unknown contour {contour!r}")
    geo = _geometry(p)
    target = complex(target)
    if seed is None:
        if contour in ("C-1", "C1"):
            end = -1.0 if contour == "C-1" else 1.0
            if target == complex(geo.g(end)):
                return complex(end)
        elif target == complex(geo.g(0.0)):
            return 0j
        seed = _seed(geo, target, contour)
    x = _newton(geo, target, seed, contour)
    if geo.on_cut(x):
        raise ContourError(contour, "solution lies on a branch cut")
    return x


def _track(geo, targets, first_seed, contour):
    """Follow the branch through a monotone sequence of targets."""
    xs = np.empty(len(targets), dtype=complex)
    x = first_seed
    for i, t in enumerate(targets):
        x = _newton(geo, t, x, contour)
        xs[i] = x
    # a continuous branch never jumps across the cut line Re x = alpha beta far from the real axis
    if np.any(geo.on_cut(xs)):
        raise ContourError(contour, "path crossed a branch cut")
    return xs


def nsd_nodes_sigma2(p: Params2) -> int:
    kappa2 = p.omega * p.alpha * (1 - p.beta ** 2) / 2
    return int(min(MAX_NODES, max(_NSD_MIN_NODES, math.ceil(_NSD_NODE_SCALE / kappa2))))


def _cheb_complex(n_max, x):
    T = np.empty((n_max + 1,) + x.shape, dtype=complex)
    T[0] = 1.0
    if n_max >= 1:
        T[1] = x
    for k in range(2, n_max + 1):
        T[k] = 2 * x * T[k - 1] - T[k - 2]
    return T


def nsd_moment_sigma2(n, p: Params2, m_gl: int | None = None, m_gh: int | None = None):
    """sigma_n for n in ``n`` (int or sequence) by numerical steepest descent.

    Endpoint paths g(x) = g(+-1) - u/omega use Gauss-Laguerre in u; the
    saddle path g(x) = g(0) - t^2/omega uses Gauss-Hermite in t, split at
    t = 0 into two half paths (C0+, C0-) tracked separately.
    """
    ns = np.atleast_1d(np.asarray(n, dtype=int))
    if np.any(ns < 0):
        raise ValueError("n must be non-negative")
    if p.omega < OMEGA_FLOOR:
        out = reference_sigma2(p, ns)
        return out if np.ndim(n) else complex(out[0])
    auto = nsd_nodes_sigma2(p)
    m_gl = auto if m_gl is None else int(m_gl)
    m_gh = auto if m_gh is None else int(m_gh)
    geo = _geometry(p)
    w = p.omega
    nmax = int(ns.max())

    def amp(x):
        return _cheb_complex(nmax, x)[ns] * h0_scaled(w * geo.sqrt_q(x))

    total = np.zeros(len(ns), dtype=complex)
    lag = laguerre_rule(m_gl)
    for end, contour in ((-1.0, "C-1"), (1.0, "C1")):
        gE = complex(geo.g(end))
        targets = gE - lag.nodes / w
        xs = _track(geo, targets, _seed(geo, targets[0], contour), contour)
        val = amp(xs) / geo.dg(xs) @ lag.weights
        total += np.sign(end) * np.exp(w * gE) * val / w
    her = hermite_rule(m_gh)
    g0 = complex(geo.g(0.0))
    d2 = complex(geo.d2g(0.0))
    sad = np.zeros(len(ns), dtype=complex)
    for contour, side in (("C0+", 1.0), ("C0-", -1.0)):
        sel = her.nodes * side > 0
        t = her.nodes[sel]
        wt = her.weights[sel]
        order = np.argsort(np.abs(t))
        t, wt = t[order], wt[order]
        seed = t[0] * np.sqrt(-2 / (w * d2))
        xs = _track(geo, g0 - t * t / w, seed, contour)
        sad += (amp(xs) / geo.dg(xs) * (2 * t)) @ wt
    if her.nodes.size % 2 == 1:
        # node at the saddle itself: 2t / g'(x(t)) -> 2 / (g''(0) dx/dt)
        mid = her.nodes.size // 2
        sad += her.weights[mid] * amp(np.zeros(1, dtype=complex))[:, 0] * 2 / (d2 * np.sqrt(-2 / (w * d2)))
    total -= np.exp(w * g0) * sad / w
    return total if np.ndim(n) else complex(total[0])


# -- regime test and asymptotics ----------------------------------------------------

def _char_poly(C, alpha, beta):
    """Coefficients (highest first) of the degree-8 characteristic factor at omega/n = C."""
    a, b, I = alpha, beta, 1j
    d = b * b - 1
    return np.array([
        -d * C * C,
        4 * a * b * d * C * C + 4 * I * b * C,
        4 - 16 * I * a * b * b * C,
        16 * I * a * a * b * C - 16 * a * b + 4 * I * b * C - 4 * a * b * d * C * C,
        16 * a * a + 8 + 2 * d * C * C,
        -16 * I * a * a * b * C - 4 * a * b * d * C * C - 4 * I * b * C - 16 * a * b,
        4 + 16 * I * a * b * b * C,
        4 * a * b * d * C * C - 4 * I * b * C,
        -d * C * C,
    ], dtype=complex)


def char_roots_sigma2(C: float, alpha: float, beta: float) -> np.ndarray:
    """Eight roots of the degree-8 factor plus the two roots alpha beta +- sqrt(alpha^2 beta^2 - 1)."""
    if not C > 0:
        raise ValueError("C must be positive")
    r = np.roots(_char_poly(C, alpha, beta))
    s = np.sqrt(complex(alpha * alpha * beta * beta - 1))
    return np.concatenate([r, [alpha * beta + s, alpha * beta - s]])


def regime_test_sigma2(p: Params2, N: int, eps: float = DEFAULT_EPS) -> str:
    """'forward-safe' if no characteristic root sits inside the unit circle at C = omega/N."""
    if N < 7:
        raise ValueError("regime test needs N >= 7")
    roots = char_roots_sigma2(p.omega / N, p.alpha, p.beta)
    if not np.all(np.isfinite(roots)):
        raise RecurrenceError("root finder failed")
    return "forward-safe" if np.min(np.abs(roots)) > 1 - eps else "bvp-required"


def regime_threshold_C(alpha: float, beta: float, eps: float = DEFAULT_EPS,
                       lo: float = 1e-3, hi: float = 1e3) -> float:
    """Smallest C = omega/n at which every root still has modulus > 1 - eps (bisection in log C)."""
    def safe(C):
        return np.min(np.abs(char_roots_sigma2(C, alpha, beta))) > 1 - eps
    if not safe(hi):
        raise ValueError("roots leave the unit circle even for large C")
    if safe(lo):
        return lo
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if safe(mid):
            hi = mid
        else:
            lo = mid
        if hi / lo < 1 + 1e-12:
            break
    return hi


def _kernel_and_slope(x, p: Params2):
    """F(x) = H0(omega sqrt q) e^{i omega beta x} and F'(x) at a real point."""
    a, b, w = p.alpha, p.beta, p.omega
    s = math.sqrt((x - a * b) ** 2 + a * a * (1 - b * b))
    ph = np.exp(1j * w * b * x)
    h0 = complex(hankel1_0(w * s))
    h1 = complex(hankel1(1, w * s))
    F = h0 * ph
    dF = (-h1 * w * (x - a * b) / s + 1j * w * b * h0) * ph
    return F, dF


def tail_sigma2(n, p: Params2, terms: int = 1):
    """Large-n asymptotic of sigma_n.

    terms=1 is the leading n^-2 term (O(n^-4) remainder); terms=2 adds the
    n^-4 term from one more integration by parts in x = cos(theta), leaving
    an O(n^-6) remainder.
    """
    if terms not in (1, 2):
        raise ValueError("terms must be 1 or 2")
    n = np.asarray(n, dtype=float)
    if np.any(n < 2):
        raise ValueError("tail asymptotics need n >= 2")
    sgn = np.where(np.mod(n, 2) == 0, 1.0, -1.0)
    Fm, dFm = _kernel_and_slope(-1.0, p)
    Fp, dFp = _kernel_and_slope(1.0, p)
    out = (-sgn * Fm - Fp) / n ** 2
    if terms == 2:
        out = out - (sgn * (Fm - 3 * dFm) + Fp + 3 * dFp) / n ** 4
    return out if out.ndim else complex(out)


_BVP_MIN_LENGTH = 3000


def _bvp_length(N, omega):
    # the terminal block must sit where the O(n^-6) tail remainder is negligible
    return max(2 * N, N + 300, _BVP_MIN_LENGTH, math.ceil(10 * omega))


# -- driver -------------------------------------------------------------------------

def compute_sigma2(p: Params2, N: int, method: str | None = None, eps: float = DEFAULT_EPS,
                   m_gl: int | None = None, m_gh: int | None = None) -> MomentTable:
    """sigma_0..sigma_N per the regime test; ``method`` forces 'forward' or 'bvp'.

    m_gl / m_gh override the steepest-descent node counts for the initial values.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if method not in (None, "forward", "bvp"):
        raise ValueError("method must be None, 'forward' or 'bvp'")
    return _compute_sigma2(p, int(N), method, float(eps), m_gl, m_gh)


@lru_cache(maxsize=64)
def _compute_sigma2(p: Params2, N: int, method, eps, m_gl=None, m_gh=None):
    diag = {}
    if p.omega < OMEGA_FLOOR:
        vals = reference_sigma2(p, np.arange(N + 1))
        diag["oracle_fallback"] = True
        return MomentTable("sigma2", vals, (("oracle", 0, N),), p, None, diag)
    n0 = min(N, N_INITIAL - 1)
    sig = list(nsd_moment_sigma2(np.arange(n0 + 1), p, m_gl, m_gh))
    diag["nsd_nodes"] = (m_gl or nsd_nodes_sigma2(p), m_gh or nsd_nodes_sigma2(p))
    if N < N_INITIAL:
        return MomentTable("sigma2", sig, (("gaussian-ic", 0, N),), p, None, diag)

    if method is None:
        regime = regime_test_sigma2(p, max(N, 7), eps)
        method = "forward" if regime == "forward-safe" else "bvp"
        diag["regime"] = regime
    gen = _GenericCoeffs(p)
    j = 9
    direct_to = gen.order - 1 if method == "forward" else j - 1
    for n in range(N_INITIAL, direct_to + 1):
        sig.append(_reflected_row(n, p, sig))

    if method == "forward":
        vals = forward_propagate(gen.spec(), np.array(sig[: gen.order]), N)
        pieces = [("gaussian-ic", 0, N_INITIAL - 1), ("forward", N_INITIAL, N)]
        return MomentTable("sigma2", vals[: N + 1], _method_ranges(pieces, N), p, None, diag)

    M = _bvp_length(N, p.omega)
    term = tail_sigma2(np.arange(M - (gen.order - j) + 1, M + 1), p, terms=2)
    bc = BoundaryConditions(initial=sig[:j], terminal=term)
    vals, info = solve_oliver_bvp(gen.spec(), bc, M, residual_tol=1e-10, return_info=True)
    diag.update(bvp_split=(j, gen.order - j), **info)
    pieces = [("gaussian-ic", 0, N_INITIAL - 1), ("forward", N_INITIAL, j - 1), ("oliver-bvp", j, N)]
    return MomentTable("sigma2", vals[: N + 1], _method_ranges(pieces, N), p, M, diag)
