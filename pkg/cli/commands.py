from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from calibration import (
    calibrate_all,
    kappa_panel,
    power_R,
    power_U,
    power_V,
    power_W,
    spike_terms,
    test_statistic,
    tw_table_check,
)
from cli import emit
from cli.config import (
    RunConfig,
    experiment_from,
    get_float,
    get_float_list,
    get_int,
    get_list,
    level_from,
    moments_from,
    quad_from,
    ratios_from,
    series_from,
    spikes_from,
    tests_from,
)
from mpcore import (
    ct_value,
    ctilde,
    extra_terms,
    phi_inverse,
    rho,
    series_constants_U,
    series_constants_V,
    v_center,
)
from oracle import contour_integrals, extra_term_num, mp_expectation
from schemas.errors import DomainError, SpikeTestError, ValidationError
from schemas.types import AspectRatio, SeriesConstants, SpikeSpec
from simharness import execute_experiment, histogram_rows
from spectra import eigen_spectrum, raw_statistics, read_data_matrix, sample_covariance

logger = logging.getLogger(__name__)

DEFAULT_C_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))
SERIES_TOL = 1e-6
CENTER_TOL = 1e-8
EXTRA_TOL = 1e-6
EXTRA_W_TOL = 1e-8
TW_TOL = 2e-3


@dataclass
class CommandResult:
    summary: dict[str, Any]
    out_dir: Path
    exit_code: int = 0
    diagnostics: list[str] = field(default_factory=list)


def _start(cfg: RunConfig) -> tuple[str, Path]:
    rid = emit.run_id(cfg.identity_document(), cfg.subcommand)
    out_dir = emit.run_dir(cfg.out, cfg.subcommand, rid)
    logger.info("%s run %s writing to %s", cfg.subcommand, rid, out_dir)
    return rid, out_dir


def _constants_block(c: float, M: int, policy, form: str) -> dict[str, Any]:
    su = series_constants_U(c, policy, form)
    sv = series_constants_V(c, policy, form)
    u_extra, w_extra, v_extra = extra_terms(c, M)
    return {
        "c": c,
        "rho": rho(c),
        "ctilde": ctilde(c),
        "ct": ct_value(c),
        "v_center": v_center(c),
        "series_U": su.to_dict(),
        "series_V": sv.to_dict(),
        "extra_terms": {"U": u_extra, "W": w_extra, "V": v_extra, "M": M},
    }


def cmd_calibrate(cfg: RunConfig) -> CommandResult:
    doc = cfg.document
    ratios = ratios_from(doc)
    moments = moments_from(doc)
    policy, form = series_from(doc)
    spikes = spikes_from(doc, ratios, seed=cfg.seed)
    kinds = tests_from(doc)
    rid, out_dir = _start(cfg)

    null = calibrate_all(ratios, None, moments, policy, form)
    report: dict[str, Any] = {
        "run_id": rid,
        "ratios": ratios.to_dict(),
        "moments": moments.to_dict(),
        "form": form,
        "constants": {"H0": _constants_block(ratios.c_n, 0, policy, form), "H1": None},
        "spikes": None,
        "spike_terms": [],
        "calibrations": {"H0": {k: null[k].to_dict() for k in kinds}, "H1": None},
    }
    if spikes is not None:
        aligned = AspectRatio(ratios.p, ratios.n, spikes.M)
        alt = calibrate_all(aligned, spikes, moments, policy, form)
        report["ratios"] = aligned.to_dict()
        report["spikes"] = spikes.to_dict()
        report["spike_terms"] = [vars(t) for t in spike_terms(aligned, spikes, moments)]
        report["constants"]["H1"] = _constants_block(aligned.c_nM, spikes.M, policy, form)
        report["calibrations"]["H1"] = {k: alt[k].to_dict() for k in kinds if k in alt}

    path = emit.write_json(out_dir / "calibration.json", report, "calibrate")
    emit.write_manifest(out_dir, rid, cfg.subcommand, cfg.identity_document(), {"calibration": path}, [])
    return CommandResult(summary=report, out_dir=out_dir)


def cmd_test(cfg: RunConfig) -> CommandResult:
    doc = cfg.document
    if "data" not in doc:
        raise ValidationError("data: required field is missing")
    data = read_data_matrix(cfg.resolve_path(str(doc["data"])), str(doc.get("format", "auto")))
    p, n = data.shape
    for key, actual in (("p", p), ("n", n)):
        if key in doc:
            declared = get_int(doc, key, minimum=1)
            if declared != actual:
                raise ValidationError(f"{key}: declared {declared} but data file has {actual}")
    ratios = ratios_from({**doc, "p": p, "n": n})
    moments = moments_from(doc)
    policy, form = series_from(doc)
    level = level_from(doc)
    kinds = tests_from(doc)
    rid, out_dir = _start(cfg)

    spectrum = eigen_spectrum(sample_covariance(data))
    raw = raw_statistics(spectrum)._asdict()
    calibs = calibrate_all(ratios, None, moments, policy, form)
    reports = {k: test_statistic(raw[k], calibs[k], level) for k in kinds}

    edge = (1.0 + math.sqrt(ratios.c_n)) ** 2
    estimate = phi_inverse(spectrum.largest, ratios.c_n) if spectrum.largest > edge else None
    summary = {
        "run_id": rid,
        "ratios": ratios.to_dict(),
        "moments": moments.to_dict(),
        "level": level,
        "largest_eigenvalue": spectrum.largest,
        "bulk_edge": edge,
        "spike_estimate": estimate,
        "tests": {k: r.to_dict() for k, r in reports.items()},
    }
    json_path = emit.write_json(out_dir / "test.json", summary, "test")
    csv_path = emit.write_csv(
        out_dir / "test.csv",
        ("kind", "raw", "z", "p_value", "reject", "level"),
        ((r.kind, r.raw, r.z, r.p_value, r.reject, r.level) for r in reports.values()),
    )
    emit.write_manifest(out_dir, rid, cfg.subcommand, cfg.identity_document(), {"report": json_path, "table": csv_path}, [])
    return CommandResult(summary=summary, out_dir=out_dir)


def _write_simulation(target: Path, run) -> dict[str, Path]:
    summary = emit.write_json(target / "summary.json", run.report.to_dict(), "simulate")
    qq_rows = []
    for kind, stat in run.report.statistics.items():
        qq_rows.extend((kind, t, e) for t, e in stat.qq_pairs)
    qq = emit.write_csv(target / "qq.csv", ("statistic", "theoretical", "empirical"), qq_rows)
    hist_rows = []
    for kind in ("U", "W", "V"):
        if kind in run.standardized:
            for row in histogram_rows(run.standardized[kind]):
                hist_rows.append((kind, row["bin_left"], row["bin_right"], row["count"], row["density"], row["normal_density"]))
    hist = emit.write_csv(
        target / "histogram.csv",
        ("statistic", "bin_left", "bin_right", "count", "density", "normal_density"),
        hist_rows,
    )
    return {"summary": summary, "qq": qq, "histogram": hist}


def cmd_simulate(cfg: RunConfig) -> CommandResult:
    doc = cfg.document
    cells = get_list(doc, "cells", default=[])
    configs = []
    if cells:
        ratios_from(doc)
        level_from(doc)
        series_from(doc)
        for i, cell in enumerate(cells):
            if not isinstance(cell, dict):
                raise ValidationError(f"cells[{i}]: expected an object with model and dist")
            try:
                configs.append(experiment_from(doc, cell, threads=cfg.threads))
            except ValidationError as exc:
                raise ValidationError(f"cells[{i}].{exc}") from None
    else:
        configs.append(experiment_from(doc, threads=cfg.threads))
    rid, out_dir = _start(cfg)

    artifacts: dict[str, Path] = {}
    diagnostics: list[str] = []
    index = []
    for i, config in enumerate(configs):
        run = execute_experiment(config)
        model = "H0" if config.model is None else config.model.kind
        label = f"cell{i:02d}_{model}_{config.dist.kind}" if cells else ""
        target = out_dir / label if label else out_dir
        written = _write_simulation(target, run)
        for name, path in written.items():
            artifacts[f"{label}/{name}" if label else name] = path
        diagnostics.extend(f"{label}: {d}" if label else d for d in run.report.diagnostics)
        index.append({"cell": label or None, "model": model, "dist": config.dist.kind, "summary": written["summary"].relative_to(out_dir).as_posix(), "diagnostics": run.report.diagnostics})

    summary = {"run_id": rid, "cells": index}
    if cells:
        artifacts["index"] = emit.write_json(out_dir / "index.json", summary, "simulate_index")
    emit.write_manifest(out_dir, rid, cfg.subcommand, cfg.identity_document(), artifacts, diagnostics)
    return CommandResult(summary=summary, out_dir=out_dir, diagnostics=diagnostics)


POWER_COLUMNS = ("alpha", "power_U", "power_W", "power_V", "power_R", "kappa_U", "kappa_W", "kappa_V", "kappa_R")


def _grid_spikes(ratios: AspectRatio, alpha: float, k2: float | None) -> SpikeSpec:
    if k2 is None:
        return SpikeSpec.single(alpha)
    second = k2 * alpha
    if second > 1.0 + math.sqrt(ratios.with_spikes(2).c_nM):
        return SpikeSpec(groups=((alpha, 1), (second, 1)))
    logger.info("second spike %.4g subcritical at alpha=%.4g, using a single spike", second, alpha)
    return SpikeSpec.single(alpha)


def cmd_power(cfg: RunConfig) -> CommandResult:
    doc = cfg.document
    ratios = ratios_from(doc)
    moments = moments_from(doc)
    policy, form = series_from(doc)
    xi = level_from(doc)
    alphas = get_float_list(doc, "alphas", low=1.0)
    k2 = None
    if doc.get("second_spike_ratio") is not None:
        k2 = get_float(doc, "second_spike_ratio", low=0.0, high=1.0)
    include_null = bool(doc.get("include_null", True))
    rid, out_dir = _start(cfg)

    rows = []
    points = []
    if include_null:
        preds = [power_U(ratios, None, moments, xi, policy, form), power_W(ratios, None, moments, xi), power_V(ratios, None, moments, xi, policy, form), power_R(ratios, None, xi=xi)]
        rows.append((None, *(p.power for p in preds), *(p.kappa for p in preds)))
        points.append({"alpha": None, "spikes": None, "panel": kappa_panel(ratios, None, moments, xi, policy, form).to_dict()})

    for i, alpha in enumerate(alphas):
        try:
            spikes = _grid_spikes(ratios, alpha, k2)
            preds = [
                power_U(ratios, spikes, moments, xi, policy, form),
                power_W(ratios, spikes, moments, xi),
                power_V(ratios, spikes, moments, xi, policy, form),
            ]
            lead = spike_terms(ratios, spikes, moments)[0]
            preds.append(power_R(ratios, (alpha, 1), lead.s2, xi, moments, M=spikes.M))
            panel = kappa_panel(ratios, spikes, moments, xi, policy, form)
        except DomainError as exc:
            raise ValidationError(f"alphas[{i}]: {exc}") from None
        rows.append((alpha, *(p.power for p in preds), *(p.kappa for p in preds)))
        points.append({"alpha": alpha, "spikes": spikes.to_dict(), "panel": panel.to_dict(), "ordering": panel.ordering()})

    csv_path = emit.write_csv(out_dir / "power.csv", POWER_COLUMNS, rows)
    summary = {
        "run_id": rid,
        "ratios": ratios.to_dict(),
        "moments": moments.to_dict(),
        "xi": xi,
        "second_spike_ratio": k2,
        "rows": [dict(zip(POWER_COLUMNS, row)) for row in rows],
        "points": points,
    }
    json_path = emit.write_json(out_dir / "power.json", summary, "power")
    emit.write_manifest(out_dir, rid, cfg.subcommand, cfg.identity_document(), {"curve": csv_path, "report": json_path}, [])
    return CommandResult(summary=summary, out_dir=out_dir)


def _series_checks(c: float, quad, policy, wanted: set[str]) -> list[dict[str, Any]]:
    checks = []
    sources: dict[str, tuple[Callable[..., SeriesConstants], Callable]] = {
        "U": (series_constants_U, np.log1p),
        "V": (series_constants_V, lambda x: x / (1.0 + x)),
    }
    for stat, (closed, f) in sources.items():
        names = [f"{q}_{stat}" for q in ("I1", "I2", "J1")]
        if not wanted.intersection(names):
            continue
        oracle = contour_integrals(f, c, quad, name=f"f_{stat}")
        harmonic = closed(c, policy, "harmonic")
        printed = closed(c, policy, "printed")
        for q, name in zip(("i1", "i2", "j1"), names):
            if name not in wanted:
                continue
            ref = getattr(oracle, q)
            error = abs(getattr(harmonic, q) - ref.real)
            checks.append(
                {
                    "quantity": name,
                    "c": c,
                    "closed_form": getattr(harmonic, q),
                    "oracle": ref.real,
                    "oracle_imag": ref.imag,
                    "abs_error": error,
                    "tolerance": SERIES_TOL,
                    "pass": bool(error <= SERIES_TOL and abs(ref.imag) <= 1e-9),
                    "printed_form": getattr(printed, q),
                    "printed_form_agrees": bool(abs(getattr(printed, q) - ref.real) <= SERIES_TOL),
                }
            )
    return checks


def _scalar_check(name: str, c: float, closed: float, oracle: float, tol: float) -> dict[str, Any]:
    error = abs(closed - oracle)
    return {"quantity": name, "c": c, "closed_form": closed, "oracle": oracle, "abs_error": error, "tolerance": tol, "pass": bool(error <= tol)}


ORACLE_QUANTITIES = ("ct", "v_center", "I1_U", "I2_U", "J1_U", "I1_V", "I2_V", "J1_V", "extra_U", "extra_W", "extra_V", "tw_table")


def cmd_oracle_check(cfg: RunConfig) -> CommandResult:
    doc = cfg.document
    c_grid = get_float_list(doc, "c_grid", default=list(DEFAULT_C_GRID), low=0.0, high=1.0)
    wanted = get_list(doc, "quantities", default=list(ORACLE_QUANTITIES))
    for i, q in enumerate(wanted):
        if q not in ORACLE_QUANTITIES:
            raise ValidationError(f"quantities[{i}]: expected one of {list(ORACLE_QUANTITIES)}, got {q!r}")
    wanted_set = set(wanted)
    quad = quad_from(doc)
    policy, _ = series_from(doc)
    rid, out_dir = _start(cfg)

    checks: list[dict[str, Any]] = []
    for c in c_grid:
        if "ct" in wanted_set:
            checks.append(_scalar_check("ct", c, ct_value(c), mp_expectation("log1p", c, quad), CENTER_TOL))
        if "v_center" in wanted_set:
            checks.append(_scalar_check("v_center", c, v_center(c), mp_expectation("ratio", c, quad), CENTER_TOL))
        checks.extend(_series_checks(c, quad, policy, wanted_set))
        closed_extra = dict(zip("UWV", extra_terms(c, 1)))
        for stat in "UWV":
            if f"extra_{stat}" in wanted_set:
                tol = EXTRA_W_TOL if stat == "W" else EXTRA_TOL
                checks.append(_scalar_check(f"extra_{stat}", c, closed_extra[stat], extra_term_num(stat, c, quad), tol))

    tw_rows = tw_table_check(TW_TOL) if "tw_table" in wanted_set else []
    failures = [f"{ch['quantity']} at c={ch['c']}: |error| {ch['abs_error']:.3e} > {ch['tolerance']:.0e}" for ch in checks if not ch["pass"]]
    failures.extend(f"tw_table at xi={row['xi']}: |F1(t) - (1 - xi)| {row['abs_error']:.3e} > {TW_TOL:.0e}" for row in tw_rows if not row["pass"])
    printed_mismatch = sorted({ch["quantity"] for ch in checks if ch.get("printed_form_agrees") is False})
    passed = not failures

    summary = {
        "run_id": rid,
        "passed": passed,
        "c_grid": c_grid,
        "quantities": [q for q in ORACLE_QUANTITIES if q in wanted_set],
        "quad": quad.to_dict(),
        "series_policy": {"tol": policy.tol, "k_max": policy.k_max},
        "checks": checks,
        "tw_table": tw_rows,
        "printed_form_mismatches": printed_mismatch,
        "failures": failures,
    }
    path = emit.write_json(out_dir / "oracle_check.json", summary, "oracle_check")
    csv_path = emit.write_csv(
        out_dir / "oracle_check.csv",
        ("quantity", "c", "closed_form", "oracle", "abs_error", "tolerance", "pass"),
        ((ch["quantity"], ch["c"], ch["closed_form"], ch["oracle"], ch["abs_error"], ch["tolerance"], ch["pass"]) for ch in checks),
    )
    emit.write_manifest(
        out_dir,
        rid,
        cfg.subcommand,
        cfg.identity_document(),
        {"report": path, "table": csv_path},
        failures,
        status="pass" if passed else "fail",
    )
    return CommandResult(summary=summary, out_dir=out_dir, exit_code=0 if passed else 3, diagnostics=failures)


COMMANDS: dict[str, Callable[[RunConfig], CommandResult]] = {
    "calibrate": cmd_calibrate,
    "test": cmd_test,
    "simulate": cmd_simulate,
    "power": cmd_power,
    "oracle-check": cmd_oracle_check,
}


def execute(cfg: RunConfig) -> CommandResult:
    """Run one subcommand; a run that fails after writing artifacts gets an error manifest."""
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except (SpikeTestError, ArithmeticError, np.linalg.LinAlgError) as exc:
        rid = emit.run_id(cfg.identity_document(), cfg.subcommand)
        out_dir = emit.run_dir(cfg.out, cfg.subcommand, rid)
        if out_dir.is_dir() and not isinstance(exc, ValidationError):
            emit.write_manifest(out_dir, rid, cfg.subcommand, cfg.identity_document(), {}, [str(exc)], status="error")
            logger.info("%s run %s failed, manifest marked error", cfg.subcommand, rid)
        raise
