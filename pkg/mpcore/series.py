"""Series constants I1, I2, J1 for f_U = log(1+x) and f_V = x/(1+x).

Two forms are available:

``harmonic`` (default)
    Sums over every Fourier harmonic of f(|1 + sqrt(c) e^{it}|^2). With
    t^2 = ctilde(c) the coefficients are geometric, so I1 = sum_j a_{2j},
    I2 = a_2 and J1 = sum_k k a_k^2 reduce to power series in ctilde.

``printed``
    The series as they are usually quoted, in powers of sqrt(c)/(2+c).
    I2 and I1(f_V) coincide with the harmonic values; I1(f_U) and both J1
    keep only the first harmonic and disagree with the contour integrals.

Every series is accumulated through its term ratio, never through explicit
factorials, and truncated once a term drops below ``policy.tol``.
"""

from __future__ import annotations

import logging
import math
from typing import Callable

from mpcore.scalars import ctilde, rho
from schemas.errors import ConvergenceError, DomainError
from schemas.types import SERIES_FORMS, SeriesConstants, SeriesPolicy

logger = logging.getLogger(__name__)

DEFAULT_POLICY = SeriesPolicy()


def accumulate(
    first: float,
    ratio: Callable[[int], float],
    policy: SeriesPolicy,
    what: str,
    start: int = 1,
) -> tuple[float, int]:
    """Sum terms t_start, t_start+1, ... where t_{k+1} = t_k * ratio(k)."""
    total = 0.0
    term = first
    k = start
    for count in range(1, policy.k_max + 1):
        total += term
        if abs(term) < policy.tol:
            logger.debug("%s converged after %d terms", what, count)
            return total, count
        term *= ratio(k)
        k += 1
    raise ConvergenceError(f"{what}: k_max={policy.k_max} reached with |term|={abs(term):.3e} >= tol={policy.tol:.1e}")


def _check(c: float, form: str) -> float:
    c = float(c)
    if not 0.0 < c < 1.0:
        raise DomainError(f"series constants need c in (0,1), got {c}")
    if form not in SERIES_FORMS:
        raise DomainError(f"unknown series form {form!r}, expected one of {SERIES_FORMS}")
    return c


def series_constants_U(c: float, policy: SeriesPolicy = DEFAULT_POLICY, form: str = "harmonic") -> SeriesConstants:
    c = _check(c, form)
    b = c / (2.0 + c) ** 2
    i2_sum, n2 = accumulate(b / 2.0, lambda k: b * (2 * k + 1) * (2 * k) / (k * (k + 2)), policy, "I2(f_U)")
    i2 = -i2_sum

    if form == "printed":
        i1_sum, n1 = accumulate(b, lambda k: b * (2 * k + 1) * (2 * k) / (k + 1) ** 2, policy, "I1(f_U) printed")
        i1 = math.log1p(rho(c)) - math.log(2.0 + c) + i1_sum
        root_b = math.sqrt(c) / (2.0 + c)
        inner, n3 = accumulate(root_b, lambda k: b * (2 * k) * (2 * k - 1) / ((k + 1) * k), policy, "J1(f_U) printed")
        j1 = inner * inner
    else:
        g = ctilde(c)
        i1_sum, n1 = accumulate(g / 2.0, lambda j: g * j / (j + 1), policy, "I1(f_U)")
        i1 = -i1_sum
        j1, n3 = accumulate(g, lambda k: g * k / (k + 1), policy, "J1(f_U)")

    return SeriesConstants(i1=i1, i2=i2, j1=j1, form=form, terms=n1 + n2 + n3)


def series_constants_V(c: float, policy: SeriesPolicy = DEFAULT_POLICY, form: str = "harmonic") -> SeriesConstants:
    c = _check(c, form)
    b = c / (2.0 + c) ** 2
    # k = 0 term of the I2 sum is zero (1/(k-1)! at k = 0)
    i2_sum, n2 = accumulate(b, lambda k: b * (2 * k + 2) * (2 * k + 1) / (k * (k + 2)), policy, "I2(f_V)")
    i2 = -i2_sum / (2.0 + c)

    r = rho(c)
    g = ctilde(c)
    if form == "printed":
        i1_sum, n1 = accumulate(
            1.0, lambda k: b * (2 * k + 1) * (2 * k + 2) / (k + 1) ** 2, policy, "I1(f_V) printed", start=0
        )
        tg = math.sqrt(g)
        bracket = g / (-((1.0 - g) ** 2)) + 1.0 / (2.0 * (tg - 1.0) ** 2) + 1.0 / (2.0 * (tg + 1.0) ** 2)
        i1 = i1_sum / (2.0 + c) - bracket / (1.0 + r)
        root_b = math.sqrt(c) / (2.0 + c)
        inner, n3 = accumulate(
            root_b, lambda k: b * (2 * k + 3) * (2 * k + 2) / ((k + 1) * (k + 2)), policy, "J1(f_V) printed", start=0
        )
        j1 = (inner / (2.0 + c)) ** 2
    else:
        scale = 1.0 / ((1.0 + r) * (1.0 - g))
        geo, n1 = accumulate(g, lambda j: g, policy, "I1(f_V)")
        i1 = -scale * geo
        weighted, n3 = accumulate(g, lambda k: g * (k + 1) / k, policy, "J1(f_V)")
        j1 = scale * scale * weighted

    return SeriesConstants(i1=i1, i2=i2, j1=j1, form=form, terms=n1 + n2 + n3)
