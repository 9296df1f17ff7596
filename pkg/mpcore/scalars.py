"""Closed-form Marchenko-Pastur quantities for an identity bulk spectrum.

All functions are pure; the companion Stieltjes transform m(z) below is the
one of (1-c) delta_0 + c F^c, i.e. the root of z m^2 + (z+1-c) m + 1 = 0 that
behaves like -1/z at infinity.
"""

from __future__ import annotations

import cmath
import math

from schemas.errors import DomainError

SUPPORT_TOL = 1e-12


def _check_ratio(c: float, *, open_left: bool = True, name: str = "c") -> float:
    c = float(c)
    if not math.isfinite(c):
        raise DomainError(f"{name} must be finite, got {c}")
    if open_left and not 0.0 < c < 1.0:
        raise DomainError(f"{name} must lie in (0,1), got {c}")
    if not open_left and not 0.0 <= c < 1.0:
        raise DomainError(f"{name} must lie in [0,1), got {c}")
    return c


def rho(c: float) -> float:
    c = float(c)
    if c < 0 or not math.isfinite(c):
        raise DomainError(f"rho needs c >= 0, got {c}")
    return (c + math.sqrt(c * c + 4.0)) / 2.0


def ctilde(c: float) -> float:
    c = float(c)
    if c < 0 or not math.isfinite(c):
        raise DomainError(f"ctilde needs c >= 0, got {c}")
    return 4.0 * c / (2.0 + c + math.sqrt(c * c + 4.0)) ** 2


def mp_edges(c: float) -> tuple[float, float]:
    root = math.sqrt(c)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def ct_value(c: float) -> float:
    """Integral of log(1+x) against the Marchenko-Pastur law F^c."""
    c = _check_ratio(c)
    rc = math.sqrt(c)
    ct = ctilde(c)
    q = math.sqrt(ct * c)
    bracket = -((rc - 1.0 / rc) ** 2) * (math.log1p(-q) + q) - math.sqrt(ct) * (rc - rc**3)
    return math.log1p(rho(c)) + bracket / (1.0 - c)


def v_center(c: float) -> float:
    """Integral of x/(1+x) against F^c; callers scale by the bulk dimension."""
    c = _check_ratio(c)
    return 1.0 / (1.0 + rho(c))


def phi(alpha: float, c: float) -> float:
    c = _check_ratio(c, open_left=False)
    alpha = float(alpha)
    if not alpha > 1.0 + math.sqrt(c):
        raise DomainError(f"spike alpha={alpha} is not supercritical for c={c} (need alpha > {1.0 + math.sqrt(c)})")
    return alpha + c * alpha / (alpha - 1.0)


def phi_inverse(lam: float, c: float) -> float:
    c = _check_ratio(c, open_left=False)
    lam = float(lam)
    edge = (1.0 + math.sqrt(c)) ** 2
    if not lam > edge:
        raise DomainError(f"lambda={lam} does not exceed the bulk edge {edge} for c={c}")
    # larger root of alpha^2 - (lam + 1 - c) alpha + lam = 0
    b = lam + 1.0 - c
    return (b + math.sqrt(b * b - 4.0 * lam)) / 2.0


def _on_support(z: complex, c: float) -> bool:
    a, b = mp_edges(c)
    return abs(z.imag) <= SUPPORT_TOL and a - SUPPORT_TOL <= z.real <= b + SUPPORT_TOL


def _branch_sqrt(z: complex, c: float) -> complex:
    a, b = mp_edges(c)
    # principal roots multiply to a function analytic off [a, b], ~ z - 1 - c at infinity
    return cmath.sqrt(z - a) * cmath.sqrt(z - b)


def mp_stieltjes(z: complex, c: float) -> complex:
    c = _check_ratio(c)
    z = complex(z)
    if z == 0:
        raise DomainError("companion Stieltjes transform has a pole at z = 0")
    if _on_support(z, c):
        raise DomainError(f"z={z} lies on the Marchenko-Pastur support for c={c}")
    s = _branch_sqrt(z, c)
    b = z + 1.0 - c
    plus = -b + s
    minus = -b - s
    # both forms give the same root; pick the one free of cancellation
    if abs(minus) >= abs(plus):
        return 2.0 / minus
    return plus / (2.0 * z)


def mp_stieltjes_derivative(z: complex, c: float) -> complex:
    m = mp_stieltjes(z, c)
    s = _branch_sqrt(complex(z), c)
    # implicit differentiation of the quadratic; 2 z m + (z + 1 - c) = s on this branch
    return -m * (m + 1.0) / s


def theta_nu(alpha: float, c: float) -> tuple[float, float]:
    lam = phi(alpha, c)
    m = mp_stieltjes(lam, c).real
    dm = mp_stieltjes_derivative(lam, c).real
    return lam * lam * dm, lam * lam * m * m


def extra_terms(c: float, M: int) -> tuple[float, float, float]:
    c = _check_ratio(c)
    if M < 0:
        raise DomainError(f"M must be non-negative, got {M}")
    r = rho(c)
    ct = ctilde(c)
    u_extra = M * math.log1p(-math.sqrt(ct * c))
    w_extra = -M * c
    v_extra = -M * (c - 2.0) / (2.0 * (1.0 + r) * (1.0 - ct)) - M / 2.0
    return u_extra, w_extra, v_extra
