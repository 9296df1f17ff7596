from __future__ import annotations

from scipy.stats import norm

from calibration.tracy_widom import tw_pvalue, tw_quantile
from schemas.errors import DomainError
from schemas.types import TestCalibration, TestReport


def critical_value(calib: TestCalibration, level: float) -> float:
    """Standardized rejection threshold; the test rejects when z exceeds it."""
    if calib.reference == "tracy_widom":
        return tw_quantile(level)
    return float(norm.isf(level))


def test_statistic(raw: float, calib: TestCalibration, level: float) -> TestReport:
    """One-sided upper test of H0 at ``level``; ties at the threshold do not reject."""
    if calib.hypothesis != "H0":
        raise DomainError(f"decisions need an H0 calibration, got {calib.hypothesis} for {calib.statistic_kind}")
    level = float(level)
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0,1), got {level}")
    raw = float(raw)
    z = float(calib.standardize(raw))
    if calib.reference == "tracy_widom":
        p_value = tw_pvalue(z)
    else:
        p_value = float(norm.sf(z))
    return TestReport(
        kind=calib.statistic_kind,
        raw=raw,
        z=z,
        p_value=min(max(p_value, 0.0), 1.0),
        reject=bool(z > critical_value(calib, level)),
        level=level,
    )


test_statistic.__test__ = False  # type: ignore[attr-defined]
