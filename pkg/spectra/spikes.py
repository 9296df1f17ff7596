from __future__ import annotations

import numpy as np

from mpcore import theta_nu
from schemas.errors import DomainError
from schemas.types import MomentProfile, SpikeSpec


def u_group_sum(spec: SpikeSpec, group_index: int) -> float:
    """Sum over j1, j2 in group k of sum_t u_{t j1}^2 u_{t j2}^2 (real data).

    This equals sum_t P_tt^2 for the projection P onto the group's span, so it
    does not depend on which orthonormal basis of that span is supplied.
    """
    cols = spec.columns(group_index)
    d_k = spec.groups[group_index][1]
    if spec.basis is None:
        return float(d_k)
    sq = spec.basis[:, cols] ** 2
    return float(np.sum(sq.T @ sq))


def s_k_squared(alpha_k: float, d_k: int, u_sum: float, moments: MomentProfile, c: float) -> float:
    if u_sum < 0:
        raise DomainError(f"u_sum must be non-negative, got {u_sum}")
    theta, nu = theta_nu(alpha_k, c)
    return (moments.alpha_x + 1.0) * d_k / theta + moments.beta_x * nu * u_sum / theta**2
