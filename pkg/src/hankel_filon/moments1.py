"""Modified moments sigma_n = int_0^1 T_n(2x-1) H0(omega x) exp(i omega beta x) dx.

The moments obey an 8-term recurrence (7-term when beta = +-1).  Below
the stability cutoff n* they are propagated forward from four Gaussian
initial values; above it the recurrence is solved as a boundary value
problem (Oliver's method) with terminal values from the large-n
asymptotics.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from types import MappingProxyType

import numpy as np

from .gaussrules import MAX_NODES, hermite_rule
from .oracle import reference_sigma1
from .recsolve import (BoundaryConditions, RecurrenceError, RecurrenceSpec,
                       forward_propagate, solve_oliver_bvp)
from .specfun import EULER_GAMMA, hankel1_0

METHOD_TAGS = ("gaussian-ic", "forward", "oliver-bvp", "asymptotic-tail", "oracle")

OMEGA_FLOOR = 0.5          # below this the integral is not oscillatory
DEFAULT_GH_NODES = 30
_MIN_GH_DISTANCE = 0.6     # closer singularities make Gauss-Hermite useless
_NEAR_ONE = 0.1            # |beta - 1| below which X_k uses its Taylor series
_X_SERIES_TERMS = 40
_BVP_MARGIN = 200


@dataclass(frozen=True)
class Params1:
    omega: float
    beta: float = 0.0

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError("omega must be positive and finite")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")

    @property
    def unit_beta(self):
        return self.beta in (1.0, -1.0)


@dataclass(frozen=True)
class MomentTable:
    """Moments sigma_0..sigma_N with the method used on each index range.

    ``methods`` is a tuple of (tag, first, last) with inclusive ranges that
    partition 0..N.
    """

    kind: str
    values: np.ndarray
    methods: tuple
    params: object
    M: int | None = None
    diagnostics: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if not isinstance(self.diagnostics, MappingProxyType):
            object.__setattr__(self, "diagnostics", MappingProxyType(dict(self.diagnostics)))
        if not np.all(np.isfinite(v)):
            raise RecurrenceError("non-finite moment values")
        expect = 0
        for tag, a, b in self.methods:
            if tag not in METHOD_TAGS or a != expect or b < a:
                raise ValueError(f"method ranges must partition 0..N, got {self.methods}")
            expect = b + 1
        if expect != len(v):
            raise ValueError("method ranges do not cover the table")

    @property
    def N(self):
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def method_of(self, n: int) -> str:
        for tag, a, b in self.methods:
            if a <= n <= b:
                return tag
        raise IndexError(n)

    def to_csv(self, fh=None, comment: str | None = None):
        """Write ``n,re,im,method`` rows; returns the text when fh is None."""
        out = io.StringIO() if fh is None else fh
        if comment:
            out.write(f"# {comment}\n")
        wr = csv.writer(out, lineterminator="\n")
        wr.writerow(["n", "re", "im", "method"])
        for tag, a, b in self.methods:
            for n in range(a, b + 1):
                z = self.values[n]
                wr.writerow([n, repr(float(z.real)), repr(float(z.imag)), tag])
        return out.getvalue() if fh is None else None


def _method_ranges(pieces, N):
    """Merge consecutive (tag, a, b) pieces clipped to 0..N."""
    out = []
    for tag, a, b in pieces:
        b = min(b, N)
        if a > b:
            continue
        if out and out[-1][0] == tag and out[-1][2] == a - 1:
            out[-1] = (tag, out[-1][1], b)
        else:
            out.append((tag, a, b))
    return tuple(out)


# -- recurrence ---------------------------------------------------------------

def _coeff_matrix(n, omega, beta):
    """(len(n), 9) array; column l multiplies sigma_{n-l}."""
    n = np.asarray(n, dtype=float)
    w, b, I = omega, beta, 1j
    ib = I * b * w
    w2 = w * w * (1 - b * b)
    n1, n2 = 1.0 / n, 1.0 / (n * n)
    c = np.empty(n.shape + (9,), dtype=complex)
    c[..., 0] = w2 * n2 / 4
    c[..., 1] = ib * (2 * n1 - n2)
    c[..., 2] = 4 - 8 * n1 + (-w2 + 2 * ib + 4) * n2
    c[..., 3] = (-6 * ib + 8) * n1 + (17 * ib - 16) * n2
    c[..., 4] = -8 + 64 * n1 + (3 * w2 - 8 * ib - 208) * n2 / 2
    c[..., 5] = (6 * ib - 8) * n1 + (-31 * ib + 48) * n2
    c[..., 6] = 4 - 56 * n1 + (-w2 + 2 * ib + 196) * n2
    c[..., 7] = ib * (-2 * n1 + 15 * n2)
    c[..., 8] = w2 * n2 / 4
    return c


def rec_coeffs_sigma1(n: int, p: Params1) -> np.ndarray:
    """The nine coefficients multiplying sigma_n, ..., sigma_{n-8} (divided by n^2)."""
    if n == 0:
        raise ValueError("the recurrence is undefined at n = 0")
    return _coeff_matrix(np.array([n]), p.omega, p.beta)[0]


class _GenericCoeffs:
    """Adapter to the generic form sum_l a_l(k) y_{k+l} = 0.

    For beta != +-1 row k is the relation at n = k+8 (order 8); for
    beta = +-1 the outer coefficients vanish and row k is n = k+7 with
    sigma_{n-1} as the highest term (order 6).
    """

    def __init__(self, p: Params1):
        self.omega, self.beta = p.omega, p.beta
        if p.unit_beta:
            self.order, self.shift, self.cols = 6, 7, slice(7, 0, -1)
        else:
            self.order, self.shift, self.cols = 8, 8, slice(None, None, -1)

    def block(self, k0, k1):
        n = np.arange(k0, k1) + self.shift
        return _coeff_matrix(n, self.omega, self.beta)[:, self.cols]

    def __call__(self, k):
        return self.block(k, k + 1)[0]

    def spec(self):
        return RecurrenceSpec(self.order, self)


def _reflected_row(n, p, sig):
    """Solve the relation at n for sigma_n, reading sigma_{-k} as sigma_k.

    ``sig`` holds sigma_0..sigma_{n-1}; the lowest index read is n-8.  For
    beta = +-1 the top coefficient vanishes and the row is solved for
    sigma_{n-1} instead.
    """
    c = rec_coeffs_sigma1(n, p)
    top = 1 if p.unit_beta else 0
    target = n - top
    lead = 0j
    acc = 0j
    for l in range(top, 9 - top):
        idx = abs(n - l)
        if idx == target:
            lead += c[l]
        else:
            acc += c[l] * sig[idx]
    if lead == 0:
        raise RecurrenceError(f"reflected row n={n} has no pivot")
    return -acc / lead


# -- initial moments -------------------------------------------------------------

def _atilde(beta):
    """int_0^inf dt / (t^2 + 2 beta t + 1), continued below beta = -1."""
    b = beta
    if b > 1:
        return math.acosh(b) / math.sqrt(b * b - 1)
    if -1 < b < 1:
        return math.acos(b) / math.sqrt(1 - b * b)
    if b == 1:
        return 1.0
    s = math.sqrt((-b - 1) / (-b + 1))
    return -(2 * math.atanh(s) + 1j * math.pi) / math.sqrt(b * b - 1)


@lru_cache(maxsize=None)
def _atilde_series():
    # (1 - b^2) A' = b A - 1 about b = 1 gives a_k = -k a_{k-1} / (2k + 1)
    a = np.zeros(_X_SERIES_TERMS)
    a[0] = 1.0
    for k in range(1, _X_SERIES_TERMS):
        a[k] = -k * a[k - 1] / (2 * k + 1)
    return a


def _series_mul(a, b):
    return np.convolve(a, b)[: _X_SERIES_TERMS]


def _series_div(a, b):
    q = np.zeros(_X_SERIES_TERMS)
    r = np.array(a[: _X_SERIES_TERMS], dtype=float)
    for k in range(_X_SERIES_TERMS):
        q[k] = r[k] / b[0]
        r[k: k + len(b)] -= q[k] * b[: _X_SERIES_TERMS - k]
    return q


@lru_cache(maxsize=None)
def _x_series():
    """Taylor coefficients of X_0..X_3 in u = beta - 1."""
    A = _atilde_series()
    one = np.zeros(_X_SERIES_TERMS)
    one[0] = 1.0
    beta = np.array([1.0, 1.0])
    beta2 = np.array([1.0, 2.0, 1.0])
    d = np.array([2.0, 1.0])      # (b^2 - 1) / u
    num1 = one - _series_mul(beta, A)
    num2 = 3 * np.pad(beta, (0, _X_SERIES_TERMS - 2)) - _series_mul(2 * beta2 + [1, 0, 0], A)
    num3 = -(np.pad(11 * beta2 + [4, 0, 0], (0, _X_SERIES_TERMS - 3))
             - 3 * _series_mul(np.convolve(beta, 2 * beta2 + [3, 0, 0]), A))
    out = [-A]
    # X1 = -num1 / (b^2 - 1); each numerator vanishes to the order of its denominator
    for k, num in ((1, -num1), (2, num2), (3, num3)):
        lead = num[:k]
        if np.max(np.abs(lead)) > 1e-12:
            raise AssertionError("X series numerator does not vanish at beta = 1")
        shifted = np.concatenate([num[k:], np.zeros(k)])
        den = np.array([1.0])
        for _ in range(k):
            den = np.convolve(den, d)
        out.append(_series_div(shifted, den))
    return tuple(out)


def _x_terms(beta):
    u = beta - 1.0
    if abs(u) < _NEAR_ONE:
        powers = u ** np.arange(_X_SERIES_TERMS)
        return [complex(np.dot(c, powers)) for c in _x_series()]
    A = _atilde(beta)
    d = beta * beta - 1
    return [-A,
            (1 - beta * A) / (1 - beta * beta),
            (3 * beta - (2 * beta * beta + 1) * A) / d ** 2,
            -(11 * beta * beta + 4 - 3 * beta * (2 * beta * beta + 3) * A) / d ** 3]


def gh_nodes_sigma1(p: Params1, m_gh: int | None = None) -> int | None:
    """Gauss-Hermite size for the initial moments; None when GH is unusable.

    The integrand has a pole at z^2 = i omega (1 + beta) and a branch point
    at z^2 = 2 i omega; the rule converges like exp(-c d sqrt(m)) with d the
    distance of the nearest one from the real axis.
    """
    base = DEFAULT_GH_NODES if m_gh is None else int(m_gh)
    if p.beta == -1.0:
        d = math.sqrt(p.omega)
    else:
        d = math.sqrt(p.omega * min(abs(1 + p.beta), 2.0) / 2)
    if d < _MIN_GH_DISTANCE:
        return None
    return min(MAX_NODES, max(base, math.ceil(0.5 * (20.0 / d) ** 2)))


def _rho_general(p, m):
    w, b = p.omega, p.beta
    rule = hermite_rule(m)
    tau = rule.nodes ** 2 / w
    den = 1 + b + 1j * tau
    f = 1.0 / (np.sqrt(2j - tau) * den)
    # d^l/dbeta^l f = (-1)^l l! f / den^l
    gh = [(-1) ** l * factorial(l) * np.dot(rule.weights, f / den ** l) for l in range(4)]
    E = np.exp(1j * (b + 1) * w)
    X = _x_terms(b)
    kmax = 3 if not p.unit_beta else 2
    rho = []
    for k in range(kmax + 1):
        s = sum(comb(k, l) * (1j * w) ** (k - l) * gh[l] for l in range(k + 1))
        val = -(2j / math.pi) * w ** -1.5 * E * s - (2 / math.pi) / w * X[k]
        rho.append(val / (1j * w) ** k)
    return rho


def _rho_minus_one(p, m):
    w = p.omega
    rule = hermite_rule(m)
    t = rule.nodes ** 2 / w
    sq = np.sqrt(2j - t)
    s0 = np.dot(rule.weights, sq)
    s1 = np.dot(rule.weights, (-1j - t) * sq)
    s2 = np.dot(rule.weights, sq * (2 * t * t + 2j * t - 3))
    c = -(2 / math.pi) / w
    rho0 = c * (1j * math.sqrt(w) * s0 + 1)
    rho1 = c * (-(1j / 3) * w ** 1.5 * s1 + 1 / 3) / (1j * w)
    rho2 = c * ((1j / 15) * w ** 2.5 * s2 + 4 / 15) / (-w * w)
    return [rho0, rho1, rho2]


def _rho_to_sigma(r):
    r0, r1, r2, r3 = r
    return [r0, 2 * r1 - r0, 8 * r2 - 8 * r1 + r0, 32 * r3 - 48 * r2 + 18 * r1 - r0]


def initial_moments_sigma1(p: Params1, m_gh: int | None = None, info: dict | None = None):
    """sigma_0..sigma_3 from the Gaussian initial-moment formulas.

    ``info`` (if given) receives the node count and the source of each
    value.  For omega below OMEGA_FLOOR, or when the rule's singularities
    sit too close to the real axis, all four come from the oracle.
    """
    if info is None:
        info = {}
    m = gh_nodes_sigma1(p, m_gh)
    if p.omega < OMEGA_FLOOR or m is None:
        info.update(source="oracle", gh_nodes=None)
        return tuple(complex(v) for v in reference_sigma1(p, np.arange(4)))
    info.update(source="gauss-hermite", gh_nodes=m)
    if p.beta == -1.0:
        rho = _rho_minus_one(p, m)
    else:
        rho = _rho_general(p, m)
    if p.unit_beta:
        # rho_3 has no closed form here; the n = 4 row with sigma_{-n} = sigma_n gives sigma_3
        sig = _rho_to_sigma(rho + [0.0])[:3]
        s3 = _reflected_row(4, p, sig + [0j])
        info["rho3_source"] = "recurrence-row-4"
        return (*sig, complex(s3))
    return tuple(complex(v) for v in _rho_to_sigma(rho))


# -- asymptotics and diagnostics ------------------------------------------------------

def tail_sigma1(n, p: Params1):
    """Two-term large-n asymptotic of sigma_n (O(n^-4) remainder)."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 2):
        raise ValueError("tail asymptotics need n >= 2")
    sgn = np.where(np.mod(n, 2) == 0, 1.0, -1.0)
    w = p.omega
    h = complex(hankel1_0(w)) * np.exp(1j * w * p.beta)
    lead = np.log(n) * 2j * sgn / math.pi
    rest = -sgn / 2 - 1j * sgn * (math.log(w / 8) + 2 - EULER_GAMMA) / math.pi - h / 2
    out = (lead + rest) / n ** 2
    return out if out.ndim else complex(out)


def cutoff_sigma1(p: Params1) -> float:
    """Index beyond which forward propagation loses accuracy."""
    if p.unit_beta:
        return float(p.omega)
    return p.omega * min(abs(1 - p.beta), abs(1 + p.beta)) / 2


def char_roots_sigma1(C: float, beta: float, with_notes: bool = False):
    """Roots of the characteristic polynomial of the recurrence at omega/n -> C.

    For beta = +-1 one quadratic pair degenerates and is omitted; the notes
    say which.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    roots = [-1.0 + 0j, -1.0 + 0j, 1.0 + 0j, 1.0 + 0j]
    notes = ["-1 and 1 are double roots"]
    for sgn in (-1.0, 1.0):
        denom = C * (beta + sgn)
        if denom == 0:
            notes.append(f"pair for (beta{'+' if sgn > 0 else '-'}1) degenerates at beta = {beta:g}")
            continue
        disc = np.sqrt(complex(C * C * (beta + sgn) ** 2 - 4))
        roots += [(2j + disc) / denom, (2j - disc) / denom]
    roots = np.array(roots, dtype=complex)
    return (roots, notes) if with_notes else roots


def _bvp_length(p: Params1, N: int) -> int:
    spread = max(abs(1 - p.beta), abs(1 + p.beta))
    return max(2 * N, math.ceil(1.5 * p.omega * spread / 2) + _BVP_MARGIN)


# -- driver -------------------------------------------------------------------------

def compute_sigma1(p: Params1, N: int, m_gh: int | None = None, method: str | None = None) -> MomentTable:
    """sigma_0..sigma_N, forward below the cutoff and by BVP above it.

    ``method`` = 'forward' or 'bvp' overrides the cutoff decision.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if method not in (None, "forward", "bvp"):
        raise ValueError("method must be None, 'forward' or 'bvp'")
    return _compute_sigma1(p, int(N), m_gh, method)


@lru_cache(maxsize=64)
def _compute_sigma1(p: Params1, N: int, m_gh, method):
    diag = {}
    if p.omega < OMEGA_FLOOR:
        vals = reference_sigma1(p, np.arange(N + 1))
        diag["oracle_fallback"] = True
        return MomentTable("sigma1", vals, (("oracle", 0, N),), p, None, diag)

    init_info = {}
    s0 = list(initial_moments_sigma1(p, m_gh, init_info))
    diag.update(init_info)
    ic_tag = "oracle" if init_info.get("source") == "oracle" else "gaussian-ic"
    nstar = cutoff_sigma1(p)
    diag["cutoff"] = nstar
    if N <= 3:
        return MomentTable("sigma1", s0[: N + 1], _method_ranges([(ic_tag, 0, 3)], N), p, None, diag)

    if method is None:
        method = "forward" if N <= nstar else "bvp"
    gen = _GenericCoeffs(p)
    # relations whose reflected indices fall below zero are solved by hand
    sig = list(s0)
    j = 6 if not p.unit_beta else 5
    direct_to = j - 1 if method == "bvp" else gen.order - 1
    for n in range(4, direct_to + 1):
        sig.append(_reflected_row(n + (1 if p.unit_beta else 0), p, sig))

    if method == "forward":
        seed = np.array(sig[: gen.order])
        vals = forward_propagate(gen.spec(), seed, N)
        pieces = [(ic_tag, 0, 3), ("forward", 4, N)]
        diag["regime"] = "forward"
        return MomentTable("sigma1", vals[: N + 1], _method_ranges(pieces, N), p, None, diag)

    M = _bvp_length(p, N)
    n_term = gen.order - j
    term = tail_sigma1(np.arange(M - n_term + 1, M + 1), p)
    bc = BoundaryConditions(initial=sig[:j], terminal=np.atleast_1d(term))
    vals, info = solve_oliver_bvp(gen.spec(), bc, M, residual_tol=1e-10, return_info=True)
    diag.update(bvp_split=(j, n_term), **info)
    pieces = [(ic_tag, 0, 3), ("forward", 4, j - 1), ("oliver-bvp", j, N)]
    return MomentTable("sigma1", vals[: N + 1], _method_ranges(pieces, N), p, M, diag)
