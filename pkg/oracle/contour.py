"""Series constants as unit-circle contour integrals, extrapolated to r = 1.

With z = e^{i theta} and g(theta) = f(|1 + sqrt(c) z|^2):

    I1(r) = (1/2 pi i) oint g (z/(z^2 - r^-2) - 1/z) dz
    I2    = (1/2 pi i) oint g / z^3 dz
    J1(r) = -(1/4 pi^2) oint oint g(z1) g(z2) / (z1 - r z2)^2 dz1 dz2

The kernels of I1 and J1 are pole-free on the circle for r > 1 and the
trapezoid rule is applied at each radius of the policy; the limit r -> 1 is
taken by polynomial extrapolation in h = r - 1. Constants integrate to zero
against both kernels, so g is centred first to keep the near-singular
kernels from amplifying its mean.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from schemas.errors import ConvergenceError, DomainError
from schemas.types import QuadPolicy, SeriesConstants

logger = logging.getLogger(__name__)

DEFAULT_QUAD = QuadPolicy()
MONOTONE_SLACK = 1e-6
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class ContourIntegrals:
    i1: complex
    i2: complex
    j1: complex
    i1_by_r: tuple[complex, ...]
    j1_by_r: tuple[complex, ...]

    @property
    def max_imag(self) -> float:
        return max(abs(self.i1.imag), abs(self.i2.imag), abs(self.j1.imag))

    def constants(self) -> SeriesConstants:
        if self.max_imag > IMAG_TOL:
            raise ConvergenceError(f"contour integrals are not real: max |imag| = {self.max_imag:.3e}")
        return SeriesConstants(i1=self.i1.real, i2=self.i2.real, j1=self.j1.real, form="contour")


def _centred_samples(f: Callable[[np.ndarray], np.ndarray], c: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    z = np.exp(1j * theta)
    g = f(np.abs(1.0 + math.sqrt(c) * z) ** 2)
    return z, g - g.mean()


def _i1_at(z: np.ndarray, g: np.ndarray, r: float) -> complex:
    # dz/(2 pi i) = z dtheta/(2 pi)
    kernel = z / (z * z - r**-2) - 1.0 / z
    return complex(np.mean(g * kernel * z))


def _j1_at(g: np.ndarray, r: float) -> complex:
    """Double trapezoid sum over the N x N grid.

    dz1 dz2 = -z1 z2 dtheta1 dtheta2, and z1 z2/(z1 - r z2)^2 depends only on
    w = z1/z2, so the grid kernel is circulant and the inner sum is a
    circular convolution.
    """
    nodes = g.shape[0]
    w = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    kernel = w / (w - r) ** 2
    inner = np.fft.ifft(np.fft.fft(kernel) * np.fft.fft(g))
    return complex(np.sum(g * inner)) / nodes**2


def _extrapolate(r_values: tuple[float, ...], values: list[complex], what: str) -> complex:
    steps = [abs(b - a) for a, b in zip(values, values[1:])]
    for prev, cur in zip(steps, steps[1:]):
        if cur > prev + MONOTONE_SLACK:
            raise ConvergenceError(f"{what}: r-sequence does not settle (steps {', '.join(f'{s:.3e}' for s in steps)})")
    h = np.asarray(r_values) - 1.0
    vals = np.asarray(values)
    real = BarycentricInterpolator(h, vals.real)(0.0)
    imag = BarycentricInterpolator(h, vals.imag)(0.0)
    return complex(float(real), float(imag))


def contour_integrals(
    f: Callable[[np.ndarray], np.ndarray],
    c: float,
    policy: QuadPolicy = DEFAULT_QUAD,
    name: str = "f",
) -> ContourIntegrals:
    c = float(c)
    if not 0.0 < c < 1.0:
        raise DomainError(f"contour oracle needs c in (0,1), got {c}")

    z, g = _centred_samples(f, c, policy.nodes)
    i2 = complex(np.mean(g * z**-2))
    i1_by_r = [_i1_at(z, g, r) for r in policy.r_values]

    _, g_pair = _centred_samples(f, c, policy.pair_nodes)
    j1_by_r = [_j1_at(g_pair, r) for r in policy.r_values]
    logger.debug("contour %s at c=%s: I1(r)=%s J1(r)=%s", name, c, i1_by_r, j1_by_r)

    return ContourIntegrals(
        i1=_extrapolate(policy.r_values, i1_by_r, f"I1({name}) at c={c}"),
        i2=i2,
        j1=_extrapolate(policy.r_values, j1_by_r, f"J1({name}) at c={c}"),
        i1_by_r=tuple(i1_by_r),
        j1_by_r=tuple(j1_by_r),
    )


def contour_series_U(c: float, policy: QuadPolicy = DEFAULT_QUAD) -> SeriesConstants:
    return contour_integrals(np.log1p, c, policy, name="f_U").constants()


def contour_series_V(c: float, policy: QuadPolicy = DEFAULT_QUAD) -> SeriesConstants:
    return contour_integrals(lambda x: x / (1.0 + x), c, policy, name="f_V").constants()
