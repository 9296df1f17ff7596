"""Marchenko-Pastur closed forms and series constants for an identity bulk."""

from mpcore.scalars import (
    ct_value,
    ctilde,
    extra_terms,
    mp_edges,
    mp_stieltjes,
    mp_stieltjes_derivative,
    phi,
    phi_inverse,
    rho,
    theta_nu,
    v_center,
)
from mpcore.series import DEFAULT_POLICY, series_constants_U, series_constants_V

__all__ = [
    "DEFAULT_POLICY",
    "ct_value",
    "ctilde",
    "extra_terms",
    "mp_edges",
    "mp_stieltjes",
    "mp_stieltjes_derivative",
    "phi",
    "phi_inverse",
    "rho",
    "series_constants_U",
    "series_constants_V",
    "theta_nu",
    "v_center",
]
