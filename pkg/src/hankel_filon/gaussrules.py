"""Gauss-Hermite and Gauss-Laguerre rules by the Golub-Welsch method.

The Jacobi matrix of the three-term recurrence is diagonalised with the
LAPACK symmetric tridiagonal eigensolver (implicit-shift QL/QR); nodes are
the eigenvalues.  Weights are the Christoffel numbers 1/sum_k p_k(x)^2 of
the orthonormal polynomials; squared first eigenvector components carry
only absolute accuracy and lose the tiny outer weights of large rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

MAX_NODES = 200


@dataclass(frozen=True)
class QuadRule:
    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f):
        """Apply the rule to a vectorised callable."""
        return np.sum(self.weights * f(self.nodes), axis=-1)


def _check_m(m):
    if not isinstance(m, (int, np.integer)) or m < 1 or m > MAX_NODES:
        raise ValueError(f"node count must be an integer in [1, {MAX_NODES}], got {m!r}")


def _christoffel(x, diag, offdiag, mu0):
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / math.sqrt(mu0))
    total = p * p
    log_scale = np.zeros_like(x)       # total and p are stored divided by exp(log_scale)
    for k in range(len(diag) - 1):
        b_prev = offdiag[k - 1] if k else 0.0
        p, p_prev = ((x - diag[k]) * p - b_prev * p_prev) / offdiag[k], p
        total = total + p * p
        big = np.abs(p) > 1e100
        if np.any(big):
            p[big] *= 1e-100
            p_prev[big] *= 1e-100
            total[big] *= 1e-200
            log_scale[big] += 200 * math.log(10)
    return np.exp(-log_scale) / total


def _golub_welsch(diag, offdiag, mu0):
    if len(diag) == 1:
        return diag.copy(), np.array([mu0])
    x = eigh_tridiagonal(diag, offdiag, eigvals_only=True)
    return x, _christoffel(x, diag, offdiag, mu0)


def _freeze(kind, x, w):
    x = np.ascontiguousarray(x, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadRule(kind, x, w)


@lru_cache(maxsize=None)
def hermite_rule(m: int) -> QuadRule:
    """m-point rule for the weight exp(-x^2) on the real line."""
    _check_m(m)
    k = np.arange(1, m)
    x, w = _golub_welsch(np.zeros(m), np.sqrt(k / 2.0), math.sqrt(math.pi))
    # exact symmetry: average the mirrored pairs
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if m % 2:
        x[m // 2] = 0.0
    return _freeze("hermite", x, w)


@lru_cache(maxsize=None)
def laguerre_rule(m: int) -> QuadRule:
    """m-point rule for the weight exp(-t) on [0, inf)."""
    _check_m(m)
    k = np.arange(1, m, dtype=float)
    x, w = _golub_welsch(2.0 * np.arange(m) + 1.0, k, 1.0)
    return _freeze("laguerre", x, w)
