"""Numerical cross-checks for the closed forms: quadrature, contour integrals, Monte Carlo."""

from oracle.contour import ContourIntegrals, contour_integrals, contour_series_U, contour_series_V
from oracle.montecarlo import MomentEstimate, mc_moments
from oracle.quadrature import KERNELS, extra_term_num, mp_expectation

__all__ = [
    "KERNELS",
    "ContourIntegrals",
    "MomentEstimate",
    "contour_integrals",
    "contour_series_U",
    "contour_series_V",
    "extra_term_num",
    "mc_moments",
    "mp_expectation",
]
