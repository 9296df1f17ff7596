from __future__ import annotations

from typing import Sequence

import numpy as np

from schemas.errors import DomainError
from schemas.types import DistSpec

GAMMA_SHAPE = 4.0
GAMMA_SCALE = 0.5


def stream(seed: int | Sequence[int]) -> np.random.Generator:
    """Counter-based generator keyed by ``seed`` (an int or e.g. (seed, replication))."""
    entropy = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    if any(s < 0 for s in entropy):
        raise DomainError(f"stream seeds must be non-negative, got {entropy}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def gen_entries(
    dist: DistSpec,
    p: int,
    n: int,
    stream_seed: int | Sequence[int] | np.random.Generator,
) -> np.ndarray:
    """p x n block of i.i.d. standardized entries (mean 0, variance 1)."""
    if p < 1 or n < 1:
        raise DomainError(f"entry block needs positive dimensions, got {p} x {n}")
    rng = stream_seed if isinstance(stream_seed, np.random.Generator) else stream(stream_seed)
    if dist.kind == "gamma_shifted":
        # mean shape*scale = 2, variance shape*scale^2 = 1
        return rng.gamma(GAMMA_SHAPE, GAMMA_SCALE, size=(p, n)) - GAMMA_SHAPE * GAMMA_SCALE
    return rng.standard_normal((p, n))
