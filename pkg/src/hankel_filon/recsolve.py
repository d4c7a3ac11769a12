"""Linear (m+1)-term recurrences: forward propagation and Oliver's method.

A recurrence is written in the generic form

    a_m(k) y_{k+m} + ... + a_1(k) y_{k+1} + a_0(k) y_k = 0,   k >= 0,

and a (j, m-j) boundary value problem fixes y_0..y_{j-1} and the last
m-j values.  The interior unknowns then solve a banded system with j
sub-diagonals and m-j super-diagonals, factorised here by band LU with
row partial pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class RecurrenceError(RuntimeError):
    """Raised for vanishing pivots, non-finite values or failed residual checks."""


@dataclass(frozen=True)
class RecurrenceSpec:
    """coeff(k) returns the m+1 coefficients a_0(k)..a_m(k)."""

    order: int
    coeff: Callable[[int], Sequence[complex]]
    valid_from: int = 0

    def coeff_block(self, k0: int, k1: int) -> np.ndarray:
        """Rows a(k) for k0 <= k < k1 as a (k1-k0, m+1) complex array."""
        blk = getattr(self.coeff, "block", None)
        if blk is not None:
            return np.asarray(blk(k0, k1), dtype=complex)
        return np.array([self.coeff(k) for k in range(k0, k1)], dtype=complex).reshape(-1, self.order + 1)


@dataclass(frozen=True)
class BoundaryConditions:
    initial: Sequence[complex]
    terminal: Sequence[complex] = field(default_factory=tuple)

    @property
    def j(self):
        return len(self.initial)


def forward_propagate(spec: RecurrenceSpec, seed, count: int, tiny: float = 1e-300) -> np.ndarray:
    """Return y_0..y_count, solving each relation for its highest index."""
    m = spec.order
    seed = np.asarray(seed, dtype=complex)
    if len(seed) != m:
        raise ValueError(f"seed must hold {m} values")
    y = np.zeros(max(count + 1, m), dtype=complex)
    y[:m] = seed
    if count < m:
        return y[: count + 1]
    A = spec.coeff_block(spec.valid_from, count - m + 1 + spec.valid_from)
    for r in range(count - m + 1):
        a = A[r]
        k = r
        if abs(a[m]) <= tiny * max(1.0, np.max(np.abs(a[:m]))):
            raise RecurrenceError(f"leading coefficient vanishes at k={k + spec.valid_from}")
        y[k + m] = -np.dot(a[:m], y[k:k + m]) / a[m]
        if not np.isfinite(y[k + m]):
            raise RecurrenceError(f"non-finite value at index {k + m}")
    return y


def _band_lu_solve(rows: np.ndarray, lower: int, rhs: np.ndarray):
    """Solve A x = rhs where row r of A holds `rows[r]` starting at column r-lower.

    Gaussian elimination with row partial pivoting; the upper band grows
    to (upper + lower) under pivoting.  O(n (lower+upper)^2) time.
    Returns (x, pivot magnitudes).
    """
    n, w = rows.shape
    upper = w - 1 - lower
    width = lower + upper + 1 + lower
    # row-major working band: entry (r, c) sits at band[r, c - r + lower]
    band = np.zeros((n, width), dtype=complex)
    band[:, :w] = rows
    b = rhs.astype(complex).copy()
    piv_mag = np.empty(n)
    colspan = upper + lower  # max columns right of the diagonal after fill
    for c in range(n):
        last = min(n - 1, c + lower)
        cand = np.arange(c, last + 1)
        vals = band[cand, c - cand + lower]
        p = c + int(np.argmax(np.abs(vals)))
        if p != c:
            # realign both rows to their new diagonal offsets and swap
            sh = p - c
            rp = np.zeros(width, dtype=complex)
            rp[sh:] = band[p, : width - sh]
            rc = np.zeros(width, dtype=complex)
            rc[: width - sh] = band[c, sh:]
            band[c], band[p] = rp, rc
            b[c], b[p] = b[p], b[c]
        d = band[c, lower]
        piv_mag[c] = abs(d)
        if d == 0:
            raise RecurrenceError(f"zero pivot at row {c}; matrix is singular")
        for r in range(c + 1, last + 1):
            off = c - r + lower
            f = band[r, off]
            if f == 0:
                continue
            f = f / d
            span = min(colspan, n - 1 - c)
            band[r, off: off + span + 1] -= f * band[c, lower: lower + span + 1]
            b[r] -= f * b[c]
    x = np.empty(n, dtype=complex)
    for c in range(n - 1, -1, -1):
        span = min(colspan, n - 1 - c)
        s = b[c] - np.dot(band[c, lower + 1: lower + 1 + span], x[c + 1: c + 1 + span])
        x[c] = s / band[c, lower]
    return x, piv_mag


def recurrence_residuals(spec: RecurrenceSpec, y, k0: int = 0, k1: int | None = None,
                         rhs=None) -> np.ndarray:
    """Relative residuals |sum a_l y_{k+l} - r_k| / (sum |a_l y_{k+l}| + |r_k|) for rows k0..k1-1.

    ``rhs`` (optional) holds r_k for every row from k = 0.
    """
    m = spec.order
    y = np.asarray(y, dtype=complex)
    if k1 is None:
        k1 = len(y) - m
    if k1 <= k0:
        return np.zeros(0)
    A = spec.coeff_block(k0 + spec.valid_from, k1 + spec.valid_from)
    idx = np.arange(k0, k1)[:, None] + np.arange(m + 1)[None, :]
    terms = A * y[idx]
    r = np.zeros(k1 - k0, dtype=complex) if rhs is None else np.asarray(rhs, dtype=complex)[k0:k1]
    num = np.abs(terms.sum(axis=1) - r)
    den = np.abs(terms).sum(axis=1) + np.abs(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        res = np.where(den > 0, num / den, 0.0)
    return res


def solve_oliver_bvp(spec: RecurrenceSpec, bc: BoundaryConditions, N: int,
                     residual_tol: float = 1e-10, return_info: bool = False, rhs=None):
    """Solve the (j, m-j) boundary value problem for y_0..y_N.

    bc.initial = y_0..y_{j-1}; bc.terminal = y_{N-m+j+1}..y_N.  ``rhs``
    gives an inhomogeneous term r_k for rows k = 0..N-m (default zero).
    """
    m = spec.order
    j = bc.j
    if len(bc.terminal) != m - j:
        raise ValueError(f"need {m - j} terminal values for a ({j},{m - j}) split")
    if N <= 2 * m:
        raise ValueError("N must exceed 2m")
    init = np.asarray(bc.initial, dtype=complex)
    term = np.asarray(bc.terminal, dtype=complex)
    n_unknown = N - m + 1
    A = spec.coeff_block(spec.valid_from, spec.valid_from + n_unknown)
    # row k touches y_k..y_{k+m}; unknown u_i = y_{j+i}
    inhom = None
    if rhs is not None:
        inhom = np.asarray(rhs, dtype=complex)
        if inhom.shape != (n_unknown,):
            raise ValueError(f"rhs must hold {n_unknown} entries")
    rhs = np.zeros(n_unknown, dtype=complex) if inhom is None else inhom.copy()
    rows = A.copy()
    for k in range(min(j, n_unknown)):
        for l in range(j - k):
            rhs[k] -= A[k, l] * init[k + l]
            rows[k, l] = 0.0
    first_term = N - m + j + 1
    for k in range(max(0, n_unknown - (m - j)), n_unknown):
        for l in range(m + 1):
            idx = k + l
            if idx >= first_term:
                rhs[k] -= A[k, l] * term[idx - first_term]
                rows[k, l] = 0.0
    # rows[k, l] multiplies unknown (k + l - j): j sub-diagonals
    x, piv = _band_lu_solve(rows, j, rhs)
    y = np.concatenate([init, x, term])
    if not np.all(np.isfinite(y)):
        raise RecurrenceError("non-finite values in BVP solution")
    cond_est = float(np.max(piv) / np.min(piv))
    res = recurrence_residuals(spec, y, rhs=inhom)
    worst = float(np.max(res)) if len(res) else 0.0
    if worst > residual_tol:
        raise RecurrenceError(
            f"BVP residual check failed: max relative residual {worst:.3e} "
            f"(pivot-ratio condition estimate {cond_est:.3e})")
    if return_info:
        return y, {"max_residual": worst, "cond_estimate": cond_est}
    return y
