"""Clenshaw-Curtis grids, DCT-I and Hermite-type Chebyshev interpolation.

Coefficients are recovered with one DCT-I of the samples.  Any derivative
conditions only touch the top coefficients: sampling at Clenshaw-Curtis
points aliases T_{nu+1+k} onto T_{nu+1-k}, so the extra coefficients are
found from a small dense system and then folded back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.fft import dct
import scipy.linalg

STANDARD = "standard"
SHIFTED = "shifted"
MAX_S = 8


@dataclass(frozen=True)
class ChebCoeffs:
    coeffs: np.ndarray
    domain: str = STANDARD

    def __post_init__(self):
        if self.domain not in (STANDARD, SHIFTED):
            raise ValueError(f"unknown domain tag {self.domain!r}")

    def __len__(self):
        return len(self.coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1


@dataclass
class HermiteData:
    """Samples at the nu+2 CC points plus optional derivative lists.

    ``end_derivs`` holds two sequences (left end, right end) of f^(j) for
    j = 0..s; ``mid_derivs`` holds f^(j)(0) for the p2 problem.
    """

    samples: np.ndarray
    end_derivs: tuple = ()
    mid_derivs: Sequence = field(default_factory=tuple)


def cc_points(nu: int) -> np.ndarray:
    """c_n = cos(n pi/(nu+1)), n = 0..nu+1, from 1 down to -1."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    n = np.arange(nu + 2)
    # sin form is symmetric to the last bit
    return np.sin(math.pi * (nu + 1 - 2 * n) / (2 * (nu + 1)))


def _dct1(u):
    u = np.asarray(u)
    if np.iscomplexobj(u):
        return dct(u.real, type=1) + 1j * dct(u.imag, type=1)
    return dct(u.astype(float), type=1)


def idct1(u) -> np.ndarray:
    """(2/(nu+1)) sum'' u_k cos(n k pi/(nu+1)),  n = 0..nu+1."""
    u = np.asarray(u)
    if u.shape[-1] < 2:
        raise ValueError("need at least two samples")
    return _dct1(u) / (u.shape[-1] - 1)


def dct1(c) -> np.ndarray:
    """Exact inverse of idct1 (evaluates sum'' c_n T_n at the CC points)."""
    c = np.asarray(c)
    if c.shape[-1] < 2:
        raise ValueError("need at least two coefficients")
    return _dct1(c) / 2.0


@lru_cache(maxsize=None)
def _deriv_int(n: int, j: int, point: int) -> int:
    if j > n:
        return 0
    if point in (1, -1):
        if n == 0:
            return 1 if j == 0 else 0
        val = (2 ** j) * math.factorial(j) * n * math.factorial(n + j - 1) // (
            math.factorial(2 * j) * math.factorial(n - j))
        return val if (point == 1 or (n - j) % 2 == 0) else -val
    if point == 0:
        # T_{n+1}^{(j)}(0) = 2j T_n^{(j-1)}(0) - T_{n-1}^{(j)}(0)
        if j == 0:
            return (1, 0, -1, 0)[n % 4]
        if n == j:
            return (2 ** (n - 1)) * math.factorial(n) if n >= 1 else 1
        return 2 * j * _deriv_int(n - 1, j - 1, 0) - _deriv_int(n - 2, j, 0)
    raise ValueError("point must be -1, 0 or +1")


def cheb_deriv_value(n: int, j: int, point: int) -> float:
    """T_n^{(j)} at point in {-1, 0, 1}; exact integers, returned as float."""
    if n < 0 or j < 0:
        raise ValueError("n and j must be non-negative")
    return float(_deriv_int(int(n), int(j), int(point)))


def cheb_deriv_table(nmax: int, jmax: int, point: int) -> np.ndarray:
    """Array D[j, n] = T_n^{(j)}(point) for n <= nmax, j <= jmax."""
    out = np.zeros((jmax + 1, nmax + 1))
    for j in range(jmax + 1):
        for n in range(nmax + 1):
            out[j, n] = _deriv_int(n, j, point)
    return out


def _halved(check):
    q = check.astype(complex)
    q[0] *= 0.5
    q[-1] *= 0.5
    return q


def _hermite_solve(samples, conds, nu, K, scale):
    """Shared core of interp_p1 / interp_p2.

    conds is a list of (point, j, value) for the derivative conditions
    (point in {-1, 0, 1} of the standard variable, j >= 1).
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape[-1] != nu + 2:
        raise ValueError(f"expected {nu + 2} samples, got {samples.shape[-1]}")
    q = _halved(idct1(samples))
    p = np.zeros(nu + 2 + K, dtype=complex)
    p[: nu + 2] = q
    if K == 0:
        return p
    jmax = max(j for _, j, _ in conds)
    tables = {pt: cheb_deriv_table(nu + 1 + K, jmax, pt) for pt in {c[0] for c in conds}}
    A = np.empty((K, K))
    rhs = np.empty(K, dtype=complex)
    ks = np.arange(1, K + 1)
    for r, (pt, j, val) in enumerate(conds):
        D = tables[pt][j]
        A[r] = D[nu + 1 + ks] - D[nu + 1 - ks]
        rhs[r] = val / scale ** j - D[: nu + 2] @ q
    # row equilibration: derivative values grow like n^{2j}
    rs = np.max(np.abs(A), axis=1)
    try:
        lu = scipy.linalg.lu_factor(A / rs[:, None])
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise np.linalg.LinAlgError(f"auxiliary Hermite system is singular: {exc}") from exc
    if np.min(np.abs(np.diag(lu[0]))) < 1e-14:
        raise np.linalg.LinAlgError("auxiliary Hermite system is singular")
    top = scipy.linalg.lu_solve(lu, rhs / rs)
    p[nu + 2:] = top
    p[nu + 1 - ks] -= top
    return p


def _check_s(s, nu, factor, odd=False):
    if s < 0 or s > MAX_S:
        raise ValueError(f"s must lie in [0, {MAX_S}]")
    if nu < max(1, factor * s):
        raise ValueError(f"need nu >= max(1, {factor}s); got nu={nu}, s={s}")
    if odd and nu % 2 == 0:
        raise ValueError("nu must be odd")


def interp_p1(data: HermiteData, s: int, nu: int) -> ChebCoeffs:
    """Hermite interpolant on [0,1] in shifted Chebyshev polynomials.

    data.samples are f((c_n+1)/2) in CC order (x = 1 first);
    data.end_derivs = (left, right) with left[j] = f^(j)(0), right[j] = f^(j)(1).
    """
    if not data.end_derivs or s == 0:
        s = 0
    _check_s(s, nu, 2)
    conds = []
    if s:
        left, right = data.end_derivs
        for j in range(1, s + 1):
            conds.append((1, j, right[j]))
            conds.append((-1, j, left[j]))
    p = _hermite_solve(data.samples, conds, nu, 2 * s, 2.0)
    return ChebCoeffs(p, SHIFTED)


def interp_p2(data: HermiteData, s: int, nu: int) -> ChebCoeffs:
    """Hermite interpolant on [-1,1] with end and midpoint derivatives.

    data.end_derivs = (left, right) at x = -1 and x = 1, data.mid_derivs at 0.
    """
    if not data.end_derivs or s == 0:
        s = 0
    _check_s(s, nu, 3, odd=True)
    conds = []
    if s:
        left, right = data.end_derivs
        mid = data.mid_derivs
        for j in range(1, s + 1):
            conds.append((-1, j, left[j]))
            conds.append((0, j, mid[j]))
            conds.append((1, j, right[j]))
    p = _hermite_solve(data.samples, conds, nu, 3 * s, 1.0)
    return ChebCoeffs(p, STANDARD)


def eval_cheb(c: ChebCoeffs, x):
    """Clenshaw evaluation of sum c_n T_n, mapping x -> 2x-1 on the shifted domain."""
    x = np.asarray(x)
    t = 2.0 * x - 1.0 if c.domain == SHIFTED else x
    val = npcheb.chebval(t, c.coeffs)
    return val.item() if np.ndim(val) == 0 else val


def cheb_T(n_max: int, x) -> np.ndarray:
    """Rows T_0(x)..T_{n_max}(x) by the three-term recurrence (complex x allowed)."""
    x = np.asarray(x)
    out = np.empty((n_max + 1,) + x.shape, dtype=np.result_type(x, float))
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for n in range(1, n_max):
        out[n + 1] = 2.0 * x * out[n] - out[n - 1]
    return out
