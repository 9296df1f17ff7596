"""Centering and scaling of the four tests, decisions, power and the kappa comparator."""

from calibration.decision import critical_value, test_statistic
from calibration.power import kappa_panel, power_R, power_U, power_V, power_W
from calibration.theorems import (
    SpikeTerm,
    calib_R,
    calib_U,
    calib_V,
    calib_W,
    calibrate_all,
    rlrt_calibration,
    rlrt_constants,
    spike_terms,
)
from calibration.tracy_widom import TW1_TABLE, quantile_interpolator, tw1_cdf, tw_pvalue, tw_quantile, tw_table_check

__all__ = [
    "TW1_TABLE",
    "SpikeTerm",
    "calib_R",
    "calib_U",
    "calib_V",
    "calib_W",
    "calibrate_all",
    "critical_value",
    "kappa_panel",
    "power_R",
    "power_U",
    "power_V",
    "power_W",
    "quantile_interpolator",
    "rlrt_calibration",
    "rlrt_constants",
    "spike_terms",
    "test_statistic",
    "tw1_cdf",
    "tw_pvalue",
    "tw_quantile",
    "tw_table_check",
]
