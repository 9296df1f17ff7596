"""Centering and scaling of U, W, V under H0 and under generalized spiked H1.

Under H1 the bulk quantities are evaluated at c_nM = (p - M)/n; the spike
locations phi_n(alpha_k) and the variances s_k^2 use the same ratio (the
bulk of H_n is identity on p - M coordinates).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from mpcore import DEFAULT_POLICY, ct_value, extra_terms, phi, series_constants_U, series_constants_V, v_center
from schemas.errors import DomainError
from schemas.types import AspectRatio, MomentProfile, SeriesPolicy, SpikeSpec, TestCalibration
from spectra import s_k_squared, u_group_sum

logger = logging.getLogger(__name__)

DEFAULT_MOMENTS = MomentProfile()


@dataclass(frozen=True)
class SpikeTerm:
    alpha: float
    d: int
    phi: float
    s2: float


def aligned_ratios(ratios: AspectRatio, spikes: SpikeSpec | None) -> AspectRatio:
    """Ratios whose M is the total multiplicity of ``spikes`` (0 for none)."""
    M = 0 if spikes is None else spikes.M
    if ratios.M == M:
        return ratios
    return ratios.with_spikes(M)


def spike_terms(ratios: AspectRatio, spikes: SpikeSpec, moments: MomentProfile) -> list[SpikeTerm]:
    ratios = aligned_ratios(ratios, spikes)
    if spikes.basis is not None and spikes.basis.shape[0] != ratios.p:
        raise DomainError(f"spike basis has {spikes.basis.shape[0]} rows, expected p={ratios.p}")
    c = ratios.c_nM
    terms = []
    for k, (alpha, d) in enumerate(spikes.groups):
        lam = phi(alpha, c)
        s2 = s_k_squared(alpha, d, u_group_sum(spikes, k), moments, c)
        terms.append(SpikeTerm(alpha=alpha, d=d, phi=lam, s2=s2))
    return terms


def calib_U(
    ratios: AspectRatio,
    spikes: SpikeSpec | None = None,
    moments: MomentProfile = DEFAULT_MOMENTS,
    policy: SeriesPolicy = DEFAULT_POLICY,
    form: str = "harmonic",
) -> TestCalibration:
    vf = moments.variance_factor
    if spikes is None:
        c = ratios.c_n
        sc = series_constants_U(c, policy, form)
        return TestCalibration(
            statistic_kind="U",
            center=ratios.p * ct_value(c),
            mu=moments.alpha_x * sc.i1 + moments.beta_x * sc.i2,
            sigma=math.sqrt(vf * sc.j1),
            hypothesis="H0",
        )

    ratios = aligned_ratios(ratios, spikes)
    c = ratios.c_nM
    sc = series_constants_U(c, policy, form)
    terms = spike_terms(ratios, spikes, moments)
    u_extra, _, _ = extra_terms(c, ratios.M)
    mu = moments.alpha_x * sc.i1 + moments.beta_x * sc.i2
    mu += sum(t.d * math.log1p(t.phi) for t in terms) + u_extra
    var = sum(t.phi**2 / (ratios.n * (1.0 + t.phi) ** 2) * t.s2 for t in terms) + vf * sc.j1
    return TestCalibration(
        statistic_kind="U",
        center=(ratios.p - ratios.M) * ct_value(c),
        mu=mu,
        sigma=math.sqrt(var),
        hypothesis="H1",
    )


def calib_W(
    ratios: AspectRatio,
    spikes: SpikeSpec | None = None,
    moments: MomentProfile = DEFAULT_MOMENTS,
) -> TestCalibration:
    vf = moments.variance_factor
    if spikes is None:
        return TestCalibration(
            statistic_kind="W",
            center=float(ratios.p),
            mu=0.0,
            sigma=math.sqrt(vf * ratios.c_n),
            hypothesis="H0",
        )

    ratios = aligned_ratios(ratios, spikes)
    c = ratios.c_nM
    terms = spike_terms(ratios, spikes, moments)
    _, w_extra, _ = extra_terms(c, ratios.M)
    var = sum(t.phi**2 / ratios.n * t.s2 for t in terms) + vf * c
    return TestCalibration(
        statistic_kind="W",
        center=float(ratios.p - ratios.M),
        mu=sum(t.d * t.phi for t in terms) + w_extra,
        sigma=math.sqrt(var),
        hypothesis="H1",
    )


def calib_V(
    ratios: AspectRatio,
    spikes: SpikeSpec | None = None,
    moments: MomentProfile = DEFAULT_MOMENTS,
    policy: SeriesPolicy = DEFAULT_POLICY,
    form: str = "harmonic",
) -> TestCalibration:
    vf = moments.variance_factor
    if spikes is None:
        c = ratios.c_n
        sc = series_constants_V(c, policy, form)
        return TestCalibration(
            statistic_kind="V",
            center=ratios.p * v_center(c),
            mu=moments.alpha_x * sc.i1 + moments.beta_x * sc.i2,
            sigma=math.sqrt(vf * sc.j1),
            hypothesis="H0",
        )

    ratios = aligned_ratios(ratios, spikes)
    c = ratios.c_nM
    sc = series_constants_V(c, policy, form)
    terms = spike_terms(ratios, spikes, moments)
    _, _, v_extra = extra_terms(c, ratios.M)
    mu = moments.alpha_x * sc.i1 + moments.beta_x * sc.i2
    mu += sum(t.d * t.phi / (1.0 + t.phi) for t in terms) + v_extra
    var = sum(t.phi**2 / (ratios.n * (1.0 + t.phi) ** 4) * t.s2 for t in terms) + vf * sc.j1
    return TestCalibration(
        statistic_kind="V",
        center=(ratios.p - ratios.M) * v_center(c),
        mu=mu,
        sigma=math.sqrt(var),
        hypothesis="H1",
    )


def rlrt_constants(c: float, n: int) -> tuple[float, float]:
    if not 0.0 < c <= 1.0:
        raise DomainError(f"RLRT constants need c in (0,1], got {c}")
    root = math.sqrt(c)
    mu_r = (1.0 + root) ** 2
    sigma_r = n ** (-2.0 / 3.0) * (1.0 + root) * (1.0 + 1.0 / root) ** (1.0 / 3.0)
    return mu_r, sigma_r


def rlrt_calibration(ratios: AspectRatio) -> tuple[float, float]:
    return rlrt_constants(ratios.c_n, ratios.n)


def calib_R(ratios: AspectRatio) -> TestCalibration:
    mu_r, sigma_r = rlrt_calibration(ratios)
    return TestCalibration(
        statistic_kind="R",
        center=mu_r,
        mu=0.0,
        sigma=sigma_r,
        hypothesis="H0",
        reference="tracy_widom",
    )


def calibrate_all(
    ratios: AspectRatio,
    spikes: SpikeSpec | None = None,
    moments: MomentProfile = DEFAULT_MOMENTS,
    policy: SeriesPolicy = DEFAULT_POLICY,
    form: str = "harmonic",
) -> dict[str, TestCalibration]:
    """U, W, V calibrations for one hypothesis; R is only calibrated under H0."""
    out = {
        "U": calib_U(ratios, spikes, moments, policy, form),
        "W": calib_W(ratios, spikes, moments),
        "V": calib_V(ratios, spikes, moments, policy, form),
    }
    if spikes is None:
        out["R"] = calib_R(ratios)
    logger.debug("calibrated %s for p=%d n=%d M=%d", sorted(out), ratios.p, ratios.n, 0 if spikes is None else spikes.M)
    return out
