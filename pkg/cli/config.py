"""Run configuration: one JSON document per run, flags override top-level scalars.

Every accessor coerces explicitly and raises ValidationError naming the
offending field as a dotted path (``spikes[1].alpha``).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from schemas.errors import DomainError, ValidationError
from schemas.types import (
    DIST_KINDS,
    MODEL_KINDS,
    SERIES_FORMS,
    STATISTIC_KINDS,
    AspectRatio,
    DistSpec,
    ExperimentConfig,
    ModelSpec,
    MomentProfile,
    QuadPolicy,
    SeriesPolicy,
    SpikeSpec,
)
from simharness import model_spikes

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("calibrate", "test", "simulate", "power", "oracle-check")
# top-level keys that only change scheduling, never results
SCHEDULING_KEYS = ("threads",)

_MISSING = object()


@dataclass
class RunConfig:
    subcommand: str
    document: dict[str, Any]
    base_dir: Path = field(default_factory=Path.cwd)
    out: str | None = None

    @property
    def seed(self) -> int:
        return get_int(self.document, "seed", default=0, minimum=0)

    @property
    def threads(self) -> int:
        return get_int(self.document, "threads", default=1, minimum=1)

    def identity_document(self) -> dict[str, Any]:
        return {k: v for k, v in self.document.items() if k not in SCHEDULING_KEYS}

    def resolve_path(self, value: str) -> Path:
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path


def _fetch(doc: dict[str, Any], key: str, default: Any, path: str) -> Any:
    value = doc.get(key, _MISSING)
    if value is _MISSING or value is None:
        if default is _MISSING:
            raise ValidationError(f"{path}: required field is missing")
        return default
    return value


def _path(prefix: str, key: str) -> str:
    return f"{prefix}.{key}" if prefix else key


def get_int(doc: dict[str, Any], key: str, *, default: Any = _MISSING, minimum: int | None = None, prefix: str = "") -> int:
    path = _path(prefix, key)
    value = _fetch(doc, key, default, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or float(value) != int(value):
        raise ValidationError(f"{path}: expected an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValidationError(f"{path}: must be at least {minimum}, got {value}")
    return value


def get_float(
    doc: dict[str, Any],
    key: str,
    *,
    default: Any = _MISSING,
    low: float | None = None,
    high: float | None = None,
    prefix: str = "",
) -> float:
    path = _path(prefix, key)
    return _bounded(_fetch(doc, key, default, path), path, low, high)


def _bounded(value: Any, path: str, low: float | None, high: float | None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if low is not None and not value > low:
        raise ValidationError(f"{path}: must exceed {low}, got {value}")
    if high is not None and not value < high:
        raise ValidationError(f"{path}: must be below {high}, got {value}")
    return value


def get_choice(doc: dict[str, Any], key: str, choices: tuple[str, ...], *, default: Any = _MISSING, prefix: str = "") -> str:
    path = _path(prefix, key)
    value = _fetch(doc, key, default, path)
    if value not in choices:
        raise ValidationError(f"{path}: expected one of {list(choices)}, got {value!r}")
    return str(value)


def get_list(doc: dict[str, Any], key: str, *, default: Any = _MISSING, prefix: str = "") -> list[Any]:
    path = _path(prefix, key)
    value = _fetch(doc, key, default, path)
    if not isinstance(value, list):
        raise ValidationError(f"{path}: expected a list, got {value!r}")
    return value


def get_float_list(
    doc: dict[str, Any],
    key: str,
    *,
    default: Any = _MISSING,
    low: float | None = None,
    high: float | None = None,
) -> list[float]:
    values = get_list(doc, key, default=default)
    return [_bounded(v, f"{key}[{i}]", low, high) for i, v in enumerate(values)]


def get_section(doc: dict[str, Any], key: str, *, prefix: str = "") -> dict[str, Any]:
    path = _path(prefix, key)
    value = doc.get(key) or {}
    if not isinstance(value, dict):
        raise ValidationError(f"{path}: expected an object, got {value!r}")
    return value


def ratios_from(doc: dict[str, Any]) -> AspectRatio:
    p = get_int(doc, "p", minimum=1)
    n = get_int(doc, "n", minimum=1)
    if not p < n:
        raise ValidationError(f"p: need p < n for c_n in (0,1), got p={p} n={n}")
    return AspectRatio(p=p, n=n)


def dist_from(doc: dict[str, Any], *, prefix: str = "") -> DistSpec:
    return DistSpec(kind=get_choice(doc, "dist", DIST_KINDS, default="gaussian", prefix=prefix))


def moments_from(doc: dict[str, Any]) -> MomentProfile:
    """Explicit ``moments`` win; otherwise the moments implied by ``dist``."""
    if "moments" not in doc:
        return dist_from(doc).moments
    section = get_section(doc, "moments")
    alpha_x = get_float(section, "alpha_x", default=1.0, prefix="moments")
    beta_x = get_float(section, "beta_x", default=0.0, prefix="moments")
    if not 0.0 <= alpha_x <= 1.0:
        raise ValidationError(f"moments.alpha_x: must lie in [0,1], got {alpha_x}")
    if beta_x < 0:
        raise ValidationError(f"moments.beta_x: must be non-negative, got {beta_x}")
    return MomentProfile(alpha_x=alpha_x, beta_x=beta_x)


def model_from(doc: dict[str, Any], *, prefix: str = "", seed: int = 0) -> ModelSpec | None:
    kind = doc.get("model")
    if kind is None:
        return None
    kind = get_choice(doc, "model", MODEL_KINDS, prefix=prefix)
    rotation_seed = get_int(doc, "rotation_seed", default=seed, minimum=0, prefix=prefix)
    alphas: tuple[float, ...] = ()
    if kind == "custom":
        alphas = tuple(get_float_list(doc, "alphas", low=1.0))
        if len(set(alphas)) != len(alphas):
            raise ValidationError(f"{_path(prefix, 'alphas')}: spike values must be distinct")
    return ModelSpec(kind=kind, rotation_seed=rotation_seed if kind in ("M3", "M4") else None, alphas=alphas)


def spikes_from(doc: dict[str, Any], ratios: AspectRatio, *, seed: int = 0) -> SpikeSpec | None:
    """``spikes`` list of {alpha, d}, or the spikes of a simulation ``model``; None under H0."""
    if "spikes" in doc and "model" in doc and doc["model"] is not None:
        raise ValidationError("spikes: give either spikes or model, not both")
    model = model_from(doc, seed=seed)
    if model is not None:
        return model_spikes(model, ratios.p, ratios.n)
    if doc.get("spikes") is None:
        return None
    groups = []
    for i, entry in enumerate(get_list(doc, "spikes")):
        prefix = f"spikes[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{prefix}: expected an object with alpha and d")
        alpha = get_float(entry, "alpha", low=1.0, prefix=prefix)
        d = get_int(entry, "d", default=1, minimum=1, prefix=prefix)
        groups.append((alpha, d))
    groups.sort(key=lambda g: g[0], reverse=True)
    try:
        spikes = SpikeSpec(groups=tuple(groups))
        AspectRatio(ratios.p, ratios.n, spikes.M)
    except DomainError as exc:
        raise ValidationError(f"spikes: {exc}") from None
    return spikes


def series_from(doc: dict[str, Any]) -> tuple[SeriesPolicy, str]:
    section = get_section(doc, "series")
    policy = SeriesPolicy(
        tol=get_float(section, "tol", default=1e-14, low=0.0, prefix="series"),
        k_max=get_int(section, "k_max", default=500, minimum=1, prefix="series"),
    )
    form = get_choice(section, "form", SERIES_FORMS, default="harmonic", prefix="series")
    return policy, form


def quad_from(doc: dict[str, Any]) -> QuadPolicy:
    section = get_section(doc, "quad")
    defaults = QuadPolicy()
    r_values = get_list(section, "r_values", default=list(defaults.r_values), prefix="quad")
    try:
        return QuadPolicy(
            nodes=get_int(section, "nodes", default=defaults.nodes, minimum=256, prefix="quad"),
            pair_nodes=get_int(section, "pair_nodes", default=defaults.pair_nodes, minimum=256, prefix="quad"),
            r_values=tuple(float(r) for r in r_values),
        )
    except (DomainError, TypeError, ValueError) as exc:
        raise ValidationError(f"quad.r_values: {exc}") from None


def tests_from(doc: dict[str, Any]) -> list[str]:
    kinds = get_list(doc, "tests", default=list(STATISTIC_KINDS))
    for i, kind in enumerate(kinds):
        if kind not in STATISTIC_KINDS:
            raise ValidationError(f"tests[{i}]: expected one of {list(STATISTIC_KINDS)}, got {kind!r}")
    return [k for k in STATISTIC_KINDS if k in kinds]


def level_from(doc: dict[str, Any]) -> float:
    return get_float(doc, "xi", default=0.05, low=0.0, high=1.0)


def experiment_from(doc: dict[str, Any], cell: dict[str, Any] | None = None, *, threads: int = 1) -> ExperimentConfig:
    ratios = ratios_from(doc)
    seed = get_int(doc, "seed", default=0, minimum=0)
    source = doc if cell is None else {**doc, **cell}
    _, form = series_from(doc)
    return ExperimentConfig(
        p=ratios.p,
        n=ratios.n,
        model=model_from(source, seed=seed),
        dist=dist_from(source),
        reps=get_int(doc, "reps", default=2000, minimum=1),
        xi=level_from(doc),
        seed=seed,
        threads=threads,
        form=form,
    )


def load_run_config(path: str | Path, subcommand: str, overrides: dict[str, Any] | None = None) -> RunConfig:
    if subcommand not in SUBCOMMANDS:
        raise ValidationError(f"unknown subcommand {subcommand!r}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: {path} line {exc.lineno}: {exc.msg}") from None
    if not isinstance(document, dict):
        raise ValidationError(f"config: {path} must hold a JSON object")

    out = None
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "out":
            out = str(value)
        else:
            document[key] = value
            logger.debug("override %s=%r", key, value)

    get_int(document, "seed", default=0, minimum=0)
    get_int(document, "threads", default=1, minimum=1)
    return RunConfig(subcommand=subcommand, document=document, base_dir=path.resolve().parent, out=out)
