"""Population covariances of the four simulation models.

M1 = diag(1+n, 1, ..., 1) and M2 = diag(1+n, 1+0.8n, 1, ..., 1); M3 and M4
conjugate them by one random orthogonal matrix U0, the left singular vectors
of a p x p standard Gaussian matrix drawn from ``rotation_seed``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import svd

from schemas.errors import DomainError
from schemas.types import ModelSpec, SpikeSpec
from simharness.generators import stream

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Population:
    """Square root of Sigma (a diagonal vector or a full matrix) and its spikes."""

    spikes: SpikeSpec
    root_diag: np.ndarray | None = None
    root_full: np.ndarray | None = None

    def covariance(self) -> np.ndarray:
        root = np.diag(self.root_diag) if self.root_full is None else self.root_full
        return root @ root.T

    def apply(self, entries: np.ndarray) -> np.ndarray:
        if self.root_full is not None:
            return self.root_full @ entries
        return self.root_diag[:, None] * entries


@lru_cache(maxsize=8)
def rotation(p: int, rotation_seed: int) -> np.ndarray:
    rng = stream(rotation_seed)
    u0, _, _ = svd(rng.standard_normal((p, p)))
    u0.setflags(write=False)
    logger.debug("drew %d x %d rotation from seed %d", p, p, rotation_seed)
    return u0


@lru_cache(maxsize=8)
def population(model: ModelSpec, p: int, n: int) -> Population:
    alphas = model.spike_values(n)
    M = len(alphas)
    if M >= p:
        raise DomainError(f"model {model.kind} needs p > {M}, got p={p}")
    eigs = np.ones(p)
    eigs[:M] = alphas
    root = np.sqrt(eigs)
    groups = tuple((a, 1) for a in alphas)
    if not model.rotated:
        return Population(spikes=SpikeSpec(groups=groups), root_diag=root)

    seed = 0 if model.rotation_seed is None else model.rotation_seed
    u0 = rotation(p, seed)
    root_full = (u0 * root) @ u0.T
    return Population(spikes=SpikeSpec(groups=groups, basis=u0[:, :M]), root_full=root_full)


def apply_model(model: ModelSpec | None, entries: np.ndarray, p: int, n: int) -> np.ndarray:
    """Sigma^{1/2} @ entries; the null model leaves entries untouched."""
    if entries.shape != (p, n):
        raise DomainError(f"entries have shape {entries.shape}, expected ({p}, {n})")
    if model is None:
        return entries
    return population(model, p, n).apply(entries)


def model_spikes(model: ModelSpec, p: int, n: int) -> SpikeSpec:
    return population(model, p, n).spikes
