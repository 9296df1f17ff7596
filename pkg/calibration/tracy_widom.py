"""Tracy-Widom law of type 1 (largest eigenvalue of real white Wishart matrices).

Quantiles come from an embedded table of upper-tail points t_xi with
P(TW1 > t_xi) = xi, interpolated monotonically (PCHIP) against the normal
score Phi^{-1}(1 - xi). Values are the four-decimal figures tabulated in
Johnstone (2001, Ann. Statist. 29, table 1), Patterson, Price & Reich (2006,
PLoS Genet. 2, table 4) and Bejan (2005, "Largest eigenvalues and sample
covariance matrices"). They are checked against ``tw1_cdf``, which evaluates
the distribution function as a Fredholm determinant (Bornemann 2010,
Math. Comp. 79).
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import det
from scipy.optimize import brentq
from scipy.special import airy
from scipy.stats import norm

from schemas.errors import DomainError

logger = logging.getLogger(__name__)

# (xi, t_xi) with P(TW1 > t_xi) = xi
TW1_TABLE: tuple[tuple[float, float], ...] = (
    (0.001, 3.2730),
    (0.005, 2.4224),
    (0.01, 2.0234),
    (0.025, 1.4537),
    (0.05, 0.9793),
    (0.10, 0.4501),
    (0.30, -0.5923),
    (0.50, -1.2686),
    (0.70, -1.9104),
    (0.90, -2.7824),
    (0.95, -3.1804),
    (0.99, -3.8954),
)

XI_MIN = TW1_TABLE[0][0]
XI_MAX = TW1_TABLE[-1][0]


def quantile_interpolator(table: tuple[tuple[float, float], ...] = TW1_TABLE) -> PchipInterpolator:
    """PCHIP of t_xi against the normal score, nodes in increasing score order."""
    rows = sorted(table, key=lambda row: row[0], reverse=True)
    scores = norm.isf([xi for xi, _ in rows])
    return PchipInterpolator(scores, [t for _, t in rows], extrapolate=False)


@lru_cache(maxsize=1)
def _default_interpolator() -> PchipInterpolator:
    return quantile_interpolator()


def tw_quantile(xi: float) -> float:
    """Upper (1 - xi) quantile of TW1."""
    xi = float(xi)
    if not XI_MIN <= xi <= XI_MAX:
        raise DomainError(f"xi={xi} outside the Tracy-Widom table range [{XI_MIN}, {XI_MAX}]")
    interp = _default_interpolator()
    lo, hi = interp.x[0], interp.x[-1]
    return float(interp(min(max(norm.isf(xi), lo), hi)))


def tw1_cdf(s: float, nodes: int = 96) -> float:
    """P(TW1 <= s) as det(I - K) on L^2(s, inf), K(x, y) = Ai((x + y)/2)/2."""
    s = float(s)
    upper = max(s, 0.0) + 14.0
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (upper - s)
    pts = half * x + 0.5 * (upper + s)
    root_w = np.sqrt(half * w)
    ai = airy(0.5 * (pts[:, None] + pts[None, :]))[0]
    kernel = 0.5 * root_w[:, None] * ai * root_w[None, :]
    value = float(det(np.eye(nodes) - kernel))
    return min(max(value, 0.0), 1.0)


def tw_pvalue(s: float) -> float:
    """P(TW1 > s): table inversion inside the tabulated span, Fredholm tail outside."""
    s = float(s)
    t_low = TW1_TABLE[-1][1]
    t_high = TW1_TABLE[0][1]
    if s >= t_high or s <= t_low:
        logger.debug("TW p-value for s=%.4f outside table, using Fredholm determinant", s)
        return 1.0 - tw1_cdf(s)
    interp = _default_interpolator()
    z_low, z_high = norm.isf(XI_MAX), norm.isf(XI_MIN)
    score = brentq(lambda z: float(interp(z)) - s, z_low, z_high, xtol=1e-13)
    return float(norm.sf(score))


def tw_table_check(tolerance: float = 2e-3) -> list[dict[str, float | bool]]:
    """Compare each table node with the Fredholm-determinant distribution function."""
    rows = []
    for xi, t in TW1_TABLE:
        cdf = tw1_cdf(t)
        err = abs(cdf - (1.0 - xi))
        rows.append({"xi": xi, "t_xi": t, "cdf": cdf, "abs_error": err, "pass": bool(err <= tolerance)})
    return rows

