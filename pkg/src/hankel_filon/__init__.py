"""Filon-Clenshaw-Curtis quadrature for integrals with frequency-dependent
Hankel kernels, stable Chebyshev-moment recurrences and a screen-scattering demo."""

__version__ = "0.1.0"

from .filonq import AmplitudeSpec, exp_moments, fcc_exp, q1, q2
from .moments1 import MomentTable, Params1, compute_sigma1
from .moments2 import Params2, compute_sigma2

__all__ = [
    "AmplitudeSpec", "MomentTable", "Params1", "Params2",
    "compute_sigma1", "compute_sigma2", "exp_moments", "fcc_exp", "q1", "q2",
]
