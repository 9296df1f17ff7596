from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from calibration import calib_U, calib_V, calib_W
from schemas.errors import DomainError
from schemas.types import AspectRatio, ExperimentConfig
from simharness import model_spikes, simulate_raw, with_overrides

logger = logging.getLogger(__name__)

MIN_REPS = 200


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    variance: float
    mean_se: float
    variance_se: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def _estimate(x: np.ndarray) -> MomentEstimate:
    m = x.size
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    centred = x - mean
    m4 = float(np.mean(centred**4))
    # normal-theory free standard error of the sample variance
    var_se = math.sqrt(max(m4 - var * var * (m - 3) / (m - 1), 0.0) / m)
    return MomentEstimate(mean=mean, variance=var, mean_se=math.sqrt(var / m), variance_se=var_se)


def mc_moments(config: ExperimentConfig, reps: int, seed: int | None = None) -> dict[str, MomentEstimate]:
    """Mean and variance of standardized U, W, V over ``reps`` replications.

    The calibration matches the config (H0 without a model, the model's spikes
    otherwise). The extra entry "W_raw" holds the unstandardized W, whose
    exact H0 mean is p.
    """
    if reps < MIN_REPS:
        raise DomainError(f"mc_moments needs at least {MIN_REPS} replications, got {reps}")
    config = with_overrides(config, reps=reps, seed=seed)
    ratios = AspectRatio(config.p, config.n)
    moments = config.dist.moments
    spikes = None if config.model is None else model_spikes(config.model, config.p, config.n)
    calibs = {
        "U": calib_U(ratios, spikes, moments, form=config.form),
        "W": calib_W(ratios, spikes, moments),
        "V": calib_V(ratios, spikes, moments, form=config.form),
    }
    raw = simulate_raw(config)
    out = {kind: _estimate(calibs[kind].standardize(raw[:, col])) for col, kind in enumerate(("U", "W", "V"))}
    out["W_raw"] = _estimate(raw[:, 1])
    logger.info(
        "mc_moments p=%d n=%d reps=%d: %s",
        config.p,
        config.n,
        reps,
        ", ".join(f"{k} mean={v.mean:.4f} var={v.variance:.4f}" for k, v in out.items()),
    )
    return out
