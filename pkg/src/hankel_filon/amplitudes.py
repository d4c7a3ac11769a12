"""Named test amplitudes shared by the CLI and the test-suite."""

from __future__ import annotations

import numpy as np

from .filonq import AmplitudeSpec

C2_KNOT = 1.0 / 3.0


def _demo1(x):
    return x * np.cos(x) / (1 + x ** 4)


def _demo1_d1(x):
    s, c = np.sin(x), np.cos(x)
    return (-x ** 5 * s - 3 * x ** 4 * c - x * s + c) / (1 + x ** 4) ** 2


def _demo1_d2(x):
    s, c = np.sin(x), np.cos(x)
    num = (-x ** 9 * c + 6 * x ** 8 * s + 12 * x ** 7 * c - 2 * x ** 5 * c + 4 * x ** 4 * s
           - 20 * x ** 3 * c - x * c - 2 * s)
    return num / (1 + x ** 4) ** 3


def _demo1_d3(x):
    s, c = np.sin(x), np.cos(x)
    num = (x ** 13 * s + 9 * x ** 12 * c - 36 * x ** 11 * s - 60 * x ** 10 * c + 3 * x ** 9 * s
           + 15 * x ** 8 * c + 24 * x ** 7 * s + 264 * x ** 6 * c + 3 * x ** 5 * s + 3 * x ** 4 * c
           + 60 * x ** 3 * s - 60 * x ** 2 * c + x * s - 3 * c)
    return num / (1 + x ** 4) ** 4


def _c2spline(x):
    return 1 + x + np.maximum(x - C2_KNOT, 0.0) ** 3


def _c2spline_d1(x):
    return 1 + 3 * np.maximum(x - C2_KNOT, 0.0) ** 2


def _c2spline_d2(x):
    return 6 * np.maximum(x - C2_KNOT, 0.0)


def _cheb(n, shifted):
    coef = np.zeros(n + 1)
    coef[n] = 1.0
    ders = [np.polynomial.chebyshev.chebder(coef, j) for j in range(1, 9)]
    k = 2.0 if shifted else 1.0

    def make(c, scale):
        if shifted:
            return lambda x: scale * np.polynomial.chebyshev.chebval(2 * np.asarray(x) - 1, c)
        return lambda x: np.polynomial.chebyshev.chebval(np.asarray(x), c)

    return AmplitudeSpec(make(coef, 1.0), tuple(make(d, k ** (j + 1)) for j, d in enumerate(ders)),
                         "polynomial")


def named_amplitude(name: str, shifted: bool = True) -> AmplitudeSpec:
    """demo1, one, c2spline or cheb:<n> (T_n(2x-1) when shifted, else T_n(x))."""
    if name == "demo1":
        return AmplitudeSpec(_demo1, (_demo1_d1, _demo1_d2, _demo1_d3), "analytic")
    if name == "one":
        zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return AmplitudeSpec(lambda x: np.ones_like(np.asarray(x, dtype=float)), (zero,) * 8, "polynomial")
    if name == "c2spline":
        return AmplitudeSpec(_c2spline, (_c2spline_d1, _c2spline_d2), "C2")
    if name.startswith("cheb:"):
        n = int(name.split(":", 1)[1])
        if n < 0:
            raise ValueError("Chebyshev degree must be non-negative")
        return _cheb(n, shifted)
    raise ValueError(f"unknown amplitude {name!r}; choose demo1, one, c2spline or cheb:<n>")
