from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh

from schemas.errors import DomainError

logger = logging.getLogger(__name__)

CLAMP_RELATIVE = 1e-10


class RawStatistics(NamedTuple):
    U: float
    W: float
    V: float
    R: float


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    """Eigenvalues sorted descending, tiny negative noise clamped to zero."""

    values: np.ndarray

    @property
    def p(self) -> int:
        return int(self.values.shape[0])

    @property
    def largest(self) -> float:
        return float(self.values[0])


def as_data_matrix(data: np.ndarray) -> np.ndarray:
    """Validate a p x n matrix (rows are variables, columns observations)."""
    y = np.asarray(data, dtype=float)
    if y.ndim != 2 or y.size == 0:
        raise DomainError(f"data must be a non-empty 2-D array, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DomainError("data contains non-finite entries")
    return y


def sample_covariance(data: np.ndarray) -> np.ndarray:
    y = as_data_matrix(data)
    n = y.shape[1]
    b = (y @ y.T) / n
    return 0.5 * (b + b.T)


def eigen_spectrum(b: np.ndarray) -> EigenSpectrum:
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.size == 0:
        raise DomainError(f"expected a non-empty square matrix, got shape {b.shape}")
    scale = float(np.max(np.abs(b)))
    if not np.allclose(b, b.T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
        raise DomainError("matrix is not symmetric within tolerance")

    values = eigh(b, eigvals_only=True)[::-1].copy()
    top = max(float(values[0]), 0.0)
    threshold = CLAMP_RELATIVE * top
    if values[-1] < -threshold:
        raise DomainError(f"matrix is not positive semi-definite: eigenvalue {values[-1]:.3e} below -{threshold:.3e}")
    values[values < 0] = 0.0
    return EigenSpectrum(values=values)


def raw_statistics(spec: EigenSpectrum) -> RawStatistics:
    lam = spec.values
    return RawStatistics(
        U=float(np.sum(np.log1p(lam))),
        W=float(np.sum(lam)),
        V=float(np.sum(lam / (1.0 + lam))),
        R=float(lam[0]),
    )
