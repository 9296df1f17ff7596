"""Replication loop and empirical summaries.

Replication ``r`` draws from its own Philox stream keyed by (seed, r) and
writes into row ``r`` of a preallocated array, so the thread count only
changes scheduling, never results.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import kstest, norm

from calibration import (
    calib_R,
    calib_U,
    calib_V,
    calib_W,
    critical_value,
    power_R,
    power_U,
    power_V,
    power_W,
    spike_terms,
    tw1_cdf,
    tw_quantile,
)
from schemas.errors import DomainError
from schemas.types import AspectRatio, ExperimentConfig, StatisticSummary, SummaryReport, TestCalibration
from simharness.generators import gen_entries, stream
from simharness.models import apply_model, model_spikes
from spectra import eigen_spectrum, raw_statistics, sample_covariance

logger = logging.getLogger(__name__)

QQ_PROBS = tuple((k / 100.0) for k in range(1, 100))
HIST_RANGE = (-4.0, 4.0)
HIST_BINS = 40
KS_WARN = 0.05
PROGRESS_EVERY = 500


@dataclass
class ExperimentRun:
    config: ExperimentConfig
    raw: np.ndarray
    standardized: dict[str, np.ndarray]
    null_calibrations: dict[str, TestCalibration]
    report: SummaryReport
    alt_calibrations: dict[str, TestCalibration] = field(default_factory=dict)


def _replicate(config: ExperimentConfig, rep: int) -> tuple[float, float, float, float]:
    rng = stream((config.seed, rep))
    entries = gen_entries(config.dist, config.p, config.n, rng)
    data = apply_model(config.model, entries, config.p, config.n)
    return tuple(raw_statistics(eigen_spectrum(sample_covariance(data))))


def simulate_raw(config: ExperimentConfig) -> np.ndarray:
    """reps x 4 array of raw (U, W, V, R), row r from replication r."""
    out = np.empty((config.reps, 4), dtype=float)

    def work(rep: int) -> None:
        out[rep] = _replicate(config, rep)
        if (rep + 1) % PROGRESS_EVERY == 0:
            logger.debug("replication %d/%d done", rep + 1, config.reps)

    if config.threads == 1:
        for rep in range(config.reps):
            work(rep)
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(work, range(config.reps)))
    return out


def _vector_tw1_cdf(x: np.ndarray) -> np.ndarray:
    return np.array([tw1_cdf(v) for v in np.atleast_1d(x)])


def ks_distance(sample: np.ndarray, cdf=norm.cdf) -> float:
    """Sup distance between the empirical CDF of ``sample`` and ``cdf``."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("ks_distance needs a non-empty sample")
    return float(kstest(x, cdf).statistic)


def qq_pairs(sample: np.ndarray, ppf=norm.ppf, probs: tuple[float, ...] = QQ_PROBS) -> list[tuple[float, float]]:
    """(theoretical, empirical) quantile pairs on a fixed probability grid."""
    emp = np.quantile(np.asarray(sample, dtype=float), probs)
    return [(float(ppf(q)), float(e)) for q, e in zip(probs, emp)]


def histogram_rows(sample: np.ndarray, bins: int = HIST_BINS, span: tuple[float, float] = HIST_RANGE) -> list[dict[str, float]]:
    x = np.asarray(sample, dtype=float)
    counts, edges = np.histogram(x, bins=bins, range=span)
    width = edges[1] - edges[0]
    rows = []
    for count, left, right in zip(counts, edges[:-1], edges[1:]):
        rows.append(
            {
                "bin_left": float(left),
                "bin_right": float(right),
                "count": int(count),
                "density": float(count / (x.size * width)),
                "normal_density": float(norm.pdf(0.5 * (left + right))),
            }
        )
    return rows


def _tw_ppf(q: float) -> float:
    return tw_quantile(1.0 - q)


def _predictions(config: ExperimentConfig, ratios: AspectRatio, spikes) -> dict[str, float | None]:
    moments = config.dist.moments
    preds: dict[str, float | None] = {
        "U": power_U(ratios, spikes, moments, config.xi, form=config.form).power,
        "W": power_W(ratios, spikes, moments, config.xi).power,
        "V": power_V(ratios, spikes, moments, config.xi, form=config.form).power,
        "R": None,
    }
    lead = spike_terms(ratios, spikes, moments)[0]
    if lead.d == 1:
        preds["R"] = power_R(ratios, (lead.alpha, 1), lead.s2, config.xi, moments, M=spikes.M).power
    return preds


def execute_experiment(config: ExperimentConfig) -> ExperimentRun:
    ratios = AspectRatio(config.p, config.n)
    moments = config.dist.moments
    null = {
        "U": calib_U(ratios, None, moments, form=config.form),
        "W": calib_W(ratios, None, moments),
        "V": calib_V(ratios, None, moments, form=config.form),
        "R": calib_R(ratios),
    }
    alt: dict[str, TestCalibration] = {}
    spikes = None
    if config.model is not None:
        spikes = model_spikes(config.model, config.p, config.n)
        alt = {
            "U": calib_U(ratios, spikes, moments, form=config.form),
            "W": calib_W(ratios, spikes, moments),
            "V": calib_V(ratios, spikes, moments, form=config.form),
        }

    logger.info("running %d replications (%s, p=%d, n=%d, threads=%d)", config.reps, config.hypothesis, config.p, config.n, config.threads)
    raw = simulate_raw(config)

    margin = 3.0 * math.sqrt(config.xi * (1.0 - config.xi) / config.reps)
    predictions = _predictions(config, ratios, spikes) if spikes is not None else {}
    standardized: dict[str, np.ndarray] = {}
    summaries: dict[str, StatisticSummary] = {}
    diagnostics: list[str] = []

    for col, kind in enumerate(("U", "W", "V", "R")):
        values = raw[:, col]
        z_null = null[kind].standardize(values)
        rate = float(np.mean(z_null > critical_value(null[kind], config.xi)))

        if kind == "R" and spikes is not None:
            summaries[kind] = StatisticSummary(
                kind=kind,
                empirical_mean=None,
                empirical_variance=None,
                ks_distance=None,
                rejection_rate=rate,
                predicted_power=predictions.get(kind),
            )
            continue

        z = alt[kind].standardize(values) if kind in alt else z_null
        standardized[kind] = z
        if kind == "R":
            ks = ks_distance(z, _vector_tw1_cdf)
            qq = qq_pairs(z, _tw_ppf)
        else:
            ks = ks_distance(z)
            qq = qq_pairs(z)

        summaries[kind] = StatisticSummary(
            kind=kind,
            empirical_mean=float(np.mean(z)),
            empirical_variance=float(np.var(z, ddof=1)) if z.size > 1 else 0.0,
            ks_distance=ks,
            rejection_rate=rate,
            qq_pairs=qq,
            predicted_power=predictions.get(kind),
            nominal_size=config.xi if spikes is None else None,
        )
        if ks > KS_WARN:
            diagnostics.append(f"{kind}: KS distance {ks:.4f} exceeds {KS_WARN}")
        if spikes is None and abs(rate - config.xi) > margin:
            diagnostics.append(f"{kind}: null rejection rate {rate:.4f} outside {config.xi} +/- {margin:.4f}")

    for kind, pred in predictions.items():
        if pred is not None and abs(summaries[kind].rejection_rate - pred) > 0.05:
            diagnostics.append(f"{kind}: empirical power {summaries[kind].rejection_rate:.4f} differs from predicted {pred:.4f} by more than 0.05")

    for line in diagnostics:
        logger.warning(line)

    report = SummaryReport(
        config=config.to_dict(),
        hypothesis=config.hypothesis,
        statistics=summaries,
        diagnostics=diagnostics,
    )
    return ExperimentRun(
        config=config,
        raw=raw,
        standardized=standardized,
        null_calibrations=null,
        alt_calibrations=alt,
        report=report,
    )


def run_experiment(config: ExperimentConfig) -> SummaryReport:
    return execute_experiment(config).report


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in changes.items() if v is not None})
