from __future__ import annotations

import math
from dataclasses import dataclass, asdict, field
from typing import Any

import numpy as np

from schemas.errors import DomainError

STATISTIC_KINDS = ("U", "W", "V", "R")
SERIES_FORMS = ("harmonic", "printed")
MODEL_KINDS = ("M1", "M2", "M3", "M4", "custom")
DIST_KINDS = ("gaussian", "gamma_shifted")


@dataclass(frozen=True)
class AspectRatio:
    """Dimensional regime (p, n, M) with the ratios the theorems are written in."""

    p: int
    n: int
    M: int = 0

    def __post_init__(self) -> None:
        if self.p < 1 or self.n < 1:
            raise DomainError(f"p and n must be positive, got p={self.p} n={self.n}")
        if self.M < 0:
            raise DomainError(f"M must be non-negative, got {self.M}")
        if self.M >= self.p or self.M >= self.n:
            raise DomainError(f"M={self.M} must be below both p={self.p} and n={self.n}")
        if self.p >= self.n:
            raise DomainError(f"c_n = p/n must lie in (0,1), got p={self.p} n={self.n}")

    @property
    def c_n(self) -> float:
        return self.p / self.n

    @property
    def c_nM(self) -> float:
        return (self.p - self.M) / self.n

    def with_spikes(self, M: int) -> AspectRatio:
        return AspectRatio(p=self.p, n=self.n, M=M)

    def to_dict(self) -> dict[str, Any]:
        return {"p": self.p, "n": self.n, "M": self.M, "c_n": self.c_n, "c_nM": self.c_nM}


@dataclass(frozen=True)
class SeriesPolicy:
    tol: float = 1e-14
    k_max: int = 500

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise DomainError(f"series tol must be positive, got {self.tol}")
        if self.k_max < 1:
            raise DomainError(f"series k_max must be at least 1, got {self.k_max}")


@dataclass(frozen=True)
class SeriesConstants:
    i1: float
    i2: float
    j1: float
    form: str = "harmonic"
    terms: int = 0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class MomentProfile:
    """Entry moments: alpha_x = |E x^2|^2, beta_x = E|x|^4 - |E x^2|^2 - 2."""

    alpha_x: float = 1.0
    beta_x: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha_x <= 1.0:
            raise DomainError(f"alpha_x must lie in [0,1], got {self.alpha_x}")
        if not math.isfinite(self.beta_x):
            raise DomainError(f"beta_x must be finite, got {self.beta_x}")

    @property
    def variance_factor(self) -> float:
        return self.alpha_x + self.beta_x + 1.0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SpikeSpec:
    """Spike groups (alpha_k, d_k), alpha descending, and their eigenbasis.

    ``basis`` is None for the standard basis (group k occupies the next d_k
    coordinates) or a p x M matrix with orthonormal columns.
    """

    groups: tuple[tuple[float, int], ...]
    basis: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        groups = tuple((float(a), int(d)) for a, d in self.groups)
        object.__setattr__(self, "groups", groups)
        alphas = [a for a, _ in groups]
        if any(d < 1 for _, d in groups):
            raise DomainError("spike multiplicities must be positive")
        if len(set(alphas)) != len(alphas):
            raise DomainError("spike values must be distinct across groups")
        if alphas != sorted(alphas, reverse=True):
            raise DomainError("spike groups must be sorted by alpha descending")
        if self.basis is not None:
            basis = np.asarray(self.basis, dtype=float)
            if basis.ndim != 2 or basis.shape[1] != self.M:
                raise DomainError(f"spike basis must have M={self.M} columns, got shape {basis.shape}")
            gram = basis.T @ basis
            if not np.allclose(gram, np.eye(self.M), atol=1e-10, rtol=0.0):
                raise DomainError("spike basis columns are not orthonormal to 1e-10")
            object.__setattr__(self, "basis", basis)

    @classmethod
    def single(cls, alpha: float) -> SpikeSpec:
        return cls(groups=((alpha, 1),))

    @property
    def M(self) -> int:
        return sum(d for _, d in self.groups)

    @property
    def K(self) -> int:
        return len(self.groups)

    @property
    def alphas(self) -> list[float]:
        return [a for a, _ in self.groups]

    def columns(self, group_index: int) -> slice:
        if not 0 <= group_index < self.K:
            raise DomainError(f"group index {group_index} out of range for {self.K} groups")
        start = sum(d for _, d in self.groups[:group_index])
        return slice(start, start + self.groups[group_index][1])

    def to_dict(self) -> dict[str, Any]:
        return {
            "groups": [{"alpha": a, "d": d} for a, d in self.groups],
            "basis": "standard-basis" if self.basis is None else "explicit",
        }


@dataclass(frozen=True)
class TestCalibration:
    __test__ = False

    statistic_kind: str
    center: float
    mu: float
    sigma: float
    hypothesis: str = "H0"
    reference: str = "normal"

    def __post_init__(self) -> None:
        if self.statistic_kind not in STATISTIC_KINDS:
            raise DomainError(f"unknown statistic kind {self.statistic_kind!r}")
        if self.hypothesis not in ("H0", "H1"):
            raise DomainError(f"hypothesis must be H0 or H1, got {self.hypothesis!r}")
        if not self.sigma > 0:
            raise DomainError(f"{self.statistic_kind} scale must be positive, got {self.sigma}")

    def standardize(self, raw: float | np.ndarray) -> float | np.ndarray:
        return (raw - self.center - self.mu) / self.sigma

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    kind: str
    raw: float
    z: float
    p_value: float
    reject: bool
    level: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PowerPrediction:
    test_kind: str
    power: float
    kappa: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class KappaPanel:
    kappa_U: float
    kappa_W: float
    kappa_V: float
    kappa_R: float | None
    label: str
    r_scale: float | None = None
    w_scale: float | None = None
    w_can_beat_r: bool | None = None

    def ordering(self) -> list[str]:
        values = {"U": self.kappa_U, "W": self.kappa_W, "V": self.kappa_V}
        if self.kappa_R is not None:
            values["R"] = self.kappa_R
        return sorted(values, key=values.__getitem__)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class QuadPolicy:
    nodes: int = 8192
    r_values: tuple[float, ...] = (1.02, 1.01, 1.005, 1.0025)
    pair_nodes: int = 16384

    def __post_init__(self) -> None:
        if self.nodes < 256 or self.pair_nodes < 256:
            raise DomainError(f"quadrature needs at least 256 nodes, got {self.nodes}/{self.pair_nodes}")
        r_values = tuple(float(r) for r in self.r_values)
        if len(r_values) < 2 or any(r <= 1.0 for r in r_values):
            raise DomainError("r_values need at least two radii, all above 1")
        if list(r_values) != sorted(r_values, reverse=True):
            raise DomainError("r_values must be sorted descending toward 1")
        object.__setattr__(self, "r_values", r_values)

    def to_dict(self) -> dict[str, Any]:
        return {"nodes": self.nodes, "pair_nodes": self.pair_nodes, "r_values": list(self.r_values)}


@dataclass(frozen=True)
class DistSpec:
    kind: str = "gaussian"

    def __post_init__(self) -> None:
        if self.kind not in DIST_KINDS:
            raise DomainError(f"unknown entry distribution {self.kind!r}")

    @property
    def moments(self) -> MomentProfile:
        if self.kind == "gamma_shifted":
            return MomentProfile(alpha_x=1.0, beta_x=1.5)
        return MomentProfile(alpha_x=1.0, beta_x=0.0)


@dataclass(frozen=True)
class ModelSpec:
    """Population model; "custom" is diagonal with the given spike values."""

    kind: str = "M1"
    rotation_seed: int | None = None
    alphas: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise DomainError(f"unknown population model {self.kind!r}")
        alphas = tuple(sorted((float(a) for a in self.alphas), reverse=True))
        object.__setattr__(self, "alphas", alphas)
        if self.kind == "custom":
            if not alphas or any(a <= 1.0 for a in alphas):
                raise DomainError(f"custom model needs spike values above 1, got {list(alphas)}")
            if len(set(alphas)) != len(alphas):
                raise DomainError("custom model spike values must be distinct")
        elif alphas:
            raise DomainError(f"model {self.kind} has fixed spikes; alphas only apply to custom")

    @property
    def rotated(self) -> bool:
        return self.kind in ("M3", "M4")

    def spike_values(self, n: int) -> list[float]:
        if self.kind == "custom":
            return list(self.alphas)
        if self.kind in ("M1", "M3"):
            return [1.0 + n]
        return [1.0 + n, 1.0 + 0.8 * n]


@dataclass(frozen=True)
class ExperimentConfig:
    p: int
    n: int
    model: ModelSpec | None = None
    dist: DistSpec = field(default_factory=DistSpec)
    reps: int = 2000
    xi: float = 0.05
    seed: int = 0
    threads: int = 1
    form: str = "harmonic"

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise DomainError(f"reps must be at least 1, got {self.reps}")
        if not 1 < self.p < self.n:
            raise DomainError(f"need 1 < p < n, got p={self.p} n={self.n}")
        if not 0.0 < self.xi < 1.0:
            raise DomainError(f"level xi must lie in (0,1), got {self.xi}")
        if self.threads < 1:
            raise DomainError(f"threads must be at least 1, got {self.threads}")
        if self.form not in SERIES_FORMS:
            raise DomainError(f"unknown series form {self.form!r}")

    @property
    def hypothesis(self) -> str:
        return "H0" if self.model is None else "H1"

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "n": self.n,
            "model": None if self.model is None else asdict(self.model),
            "dist": self.dist.kind,
            "reps": self.reps,
            "xi": self.xi,
            "seed": self.seed,
            "form": self.form,
        }


@dataclass
class StatisticSummary:
    kind: str
    empirical_mean: float | None
    empirical_variance: float | None
    ks_distance: float | None
    rejection_rate: float
    qq_pairs: list[tuple[float, float]] = field(default_factory=list)
    predicted_power: float | None = None
    nominal_size: float | None = None

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["qq_pairs"] = [list(pair) for pair in self.qq_pairs]
        return data


@dataclass
class SummaryReport:
    config: dict[str, Any]
    hypothesis: str
    statistics: dict[str, StatisticSummary]
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "hypothesis": self.hypothesis,
            "statistics": {k: v.to_dict() for k, v in self.statistics.items()},
            "diagnostics": list(self.diagnostics),
        }
