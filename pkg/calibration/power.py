"""Asymptotic power of the four tests and the kappa comparator.

Every power is Phi(kappa), kappa being the argument of the standard normal
distribution function in the corresponding power corollary. H0 constants are
evaluated at c_n and H1 constants at c_nM. The comparator panel uses the
c_n-based extra terms of the direct comparison display, while ``power_W`` and
``power_V`` use c_nM as their corollaries do.
"""

from __future__ import annotations

import logging
import math

from scipy.stats import norm

from calibration.theorems import (
    DEFAULT_MOMENTS,
    aligned_ratios,
    calib_U,
    calib_V,
    calib_W,
    rlrt_calibration,
    spike_terms,
)
from calibration.tracy_widom import tw_quantile
from mpcore import DEFAULT_POLICY, ct_value, extra_terms, phi, v_center
from schemas.errors import DomainError
from schemas.types import AspectRatio, KappaPanel, MomentProfile, PowerPrediction, SeriesPolicy, SpikeSpec
from spectra import s_k_squared

logger = logging.getLogger(__name__)


def _check_level(xi: float) -> float:
    xi = float(xi)
    if not 0.0 < xi < 1.0:
        raise DomainError(f"level xi must lie in (0,1), got {xi}")
    return xi


def _prediction(kind: str, kappa: float) -> PowerPrediction:
    return PowerPrediction(test_kind=kind, power=float(norm.cdf(kappa)), kappa=float(kappa))


def _empty(spikes: SpikeSpec | None) -> bool:
    return spikes is None or spikes.M == 0


def _kappa_U(ratios, spikes, moments, xi, policy, form) -> float:
    z = norm.isf(xi)
    null = calib_U(ratios, None, moments, policy, form)
    if _empty(spikes):
        return -z
    alt = calib_U(ratios, spikes, moments, policy, form)
    ratios = aligned_ratios(ratios, spikes)
    terms = spike_terms(ratios, spikes, moments)
    u_extra, _, _ = extra_terms(ratios.c_nM, ratios.M)
    shift = (ratios.p - ratios.M) * ct_value(ratios.c_nM) - ratios.p * ct_value(ratios.c_n)
    shift += sum(t.d * math.log1p(t.phi) for t in terms) + u_extra
    return (shift - z * null.sigma) / alt.sigma


def _kappa_W(ratios, spikes, moments, xi, *, extra_ratio: str) -> float:
    z = norm.isf(xi)
    null = calib_W(ratios, None, moments)
    if _empty(spikes):
        return -z
    alt = calib_W(ratios, spikes, moments)
    ratios = aligned_ratios(ratios, spikes)
    terms = spike_terms(ratios, spikes, moments)
    c = ratios.c_n if extra_ratio == "c_n" else ratios.c_nM
    shift = sum(t.d * t.phi for t in terms) - ratios.M * c - ratios.M
    return (shift - z * null.sigma) / alt.sigma


def _kappa_V(ratios, spikes, moments, xi, policy, form, *, extra_ratio: str) -> float:
    z = norm.isf(xi)
    null = calib_V(ratios, None, moments, policy, form)
    if _empty(spikes):
        return -z
    alt = calib_V(ratios, spikes, moments, policy, form)
    ratios = aligned_ratios(ratios, spikes)
    terms = spike_terms(ratios, spikes, moments)
    c = ratios.c_n if extra_ratio == "c_n" else ratios.c_nM
    _, _, v_extra = extra_terms(c, ratios.M)
    shift = sum(t.d * t.phi / (1.0 + t.phi) for t in terms)
    shift += (ratios.p - ratios.M) * v_center(ratios.c_nM) - ratios.p * v_center(ratios.c_n) + v_extra
    return (shift - z * null.sigma) / alt.sigma


def _kappa_R(ratios: AspectRatio, lam: float, s1_squared: float, xi: float) -> float:
    if not s1_squared > 0:
        raise DomainError(f"s1^2 must be positive, got {s1_squared}")
    mu_r, sigma_r = rlrt_calibration(ratios)
    return (lam - mu_r - tw_quantile(xi) * sigma_r) / (math.sqrt(s1_squared) * lam / math.sqrt(ratios.n))


def power_U(
    ratios: AspectRatio,
    spikes: SpikeSpec | None,
    moments: MomentProfile = DEFAULT_MOMENTS,
    xi: float = 0.05,
    policy: SeriesPolicy = DEFAULT_POLICY,
    form: str = "harmonic",
) -> PowerPrediction:
    xi = _check_level(xi)
    return _prediction("U", _kappa_U(ratios, spikes, moments, xi, policy, form))


def power_W(
    ratios: AspectRatio,
    spikes: SpikeSpec | None,
    moments: MomentProfile = DEFAULT_MOMENTS,
    xi: float = 0.05,
) -> PowerPrediction:
    xi = _check_level(xi)
    return _prediction("W", _kappa_W(ratios, spikes, moments, xi, extra_ratio="c_nM"))


def power_V(
    ratios: AspectRatio,
    spikes: SpikeSpec | None,
    moments: MomentProfile = DEFAULT_MOMENTS,
    xi: float = 0.05,
    policy: SeriesPolicy = DEFAULT_POLICY,
    form: str = "harmonic",
) -> PowerPrediction:
    xi = _check_level(xi)
    return _prediction("V", _kappa_V(ratios, spikes, moments, xi, policy, form, extra_ratio="c_nM"))


def power_R(
    ratios: AspectRatio,
    spike_1: tuple[float, int] | None,
    s1_squared: float | None = None,
    xi: float = 0.05,
    moments: MomentProfile = DEFAULT_MOMENTS,
    M: int = 1,
) -> PowerPrediction:
    """RLRT power for a simple leading spike; ``spike_1=None`` gives the size xi.

    ``M`` is the total spike count of the alternative; phi and the default
    ``s1_squared`` (a spike along a standard basis vector) are both taken at
    c_nM for that M, the ratio ``spike_terms`` uses.
    """
    xi = _check_level(xi)
    if spike_1 is None:
        return _prediction("R", norm.ppf(xi))
    alpha, d = spike_1
    if int(d) != 1:
        raise DomainError(f"RLRT power needs a simple leading spike (d1 = 1), got d1={d}")
    if M < 1:
        raise DomainError(f"RLRT power needs at least one spike, got M={M}")
    c = ratios.with_spikes(M).c_nM
    if s1_squared is None:
        s1_squared = s_k_squared(alpha, 1, 1.0, moments, c)
    lam = phi(alpha, c)
    return _prediction("R", _kappa_R(ratios, lam, s1_squared, xi))


def kappa_panel(
    ratios: AspectRatio,
    spikes: SpikeSpec | None,
    moments: MomentProfile = DEFAULT_MOMENTS,
    xi: float = 0.05,
    policy: SeriesPolicy = DEFAULT_POLICY,
    form: str = "harmonic",
) -> KappaPanel:
    """The four Phi-arguments side by side, with a dominance label.

    The label is "R" while the leading spike stays below sqrt(n) and "W" from
    there on. For two or more groups the panel also compares the W and R
    noise scales with k2 = alpha_2/alpha_1; W can beat R when its scale is
    the smaller one.
    """
    xi = _check_level(xi)
    if _empty(spikes):
        z = float(norm.isf(xi))
        return KappaPanel(kappa_U=-z, kappa_W=-z, kappa_V=-z, kappa_R=-z, label="none")

    kappa_U = _kappa_U(ratios, spikes, moments, xi, policy, form)
    kappa_W = _kappa_W(ratios, spikes, moments, xi, extra_ratio="c_n")
    kappa_V = _kappa_V(ratios, spikes, moments, xi, policy, form, extra_ratio="c_n")

    terms = spike_terms(ratios, spikes, moments)
    lead = terms[0]
    kappa_R = None
    if lead.d == 1:
        kappa_R = _kappa_R(ratios, lead.phi, lead.s2, xi)
    else:
        logger.info("kappa_R omitted: leading spike has multiplicity %d", lead.d)

    r_scale = w_scale = None
    w_can_beat_r = None
    if len(terms) >= 2:
        k2 = terms[1].alpha / lead.alpha
        w_scale = math.sqrt((lead.s2 + k2**2 * terms[1].s2) / (ratios.n * (1.0 + k2**2)))
        r_scale = math.sqrt(lead.s2 / ratios.n)
        w_can_beat_r = w_scale < r_scale

    label = "R" if lead.alpha < math.sqrt(ratios.n) else "W"
    return KappaPanel(
        kappa_U=float(kappa_U),
        kappa_W=float(kappa_W),
        kappa_V=float(kappa_V),
        kappa_R=None if kappa_R is None else float(kappa_R),
        label=label,
        r_scale=r_scale,
        w_scale=w_scale,
        w_can_beat_r=w_can_beat_r,
    )
