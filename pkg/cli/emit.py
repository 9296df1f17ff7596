"""Run directories, JSON/CSV artifacts and the run manifest.

JSON is written with sorted keys and validated against ``schemas/<name>.schema.json``
before it touches disk. CSV floats use 17 significant digits. Nothing written
here carries a wall-clock timestamp, so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import subprocess
from pathlib import Path
from typing import Any, Iterable, Sequence

from schemas import SCHEMA_DIR
from schemas.errors import ValidationError

logger = logging.getLogger(__name__)

RUNS_ROOT = Path("runs")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def run_id(document: dict[str, Any], subcommand: str) -> str:
    digest = hashlib.sha256((canonical_json(document) + "\n" + subcommand).encode("utf-8"))
    return digest.hexdigest()[:12]


def run_dir(out: str | None, subcommand: str, rid: str) -> Path:
    """Where a run writes; created by the first artifact, not here."""
    return Path(out) if out else RUNS_ROOT / f"{subcommand}_{rid}"


def _clean(obj: Any) -> Any:
    """JSON-safe copy: tuples to lists, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def validate_document(obj: Any, schema_name: str) -> None:
    try:
        import jsonschema
    except ImportError:
        logger.warning("jsonschema not installed; %s emitted without schema validation", schema_name)
        return
    schema_path = SCHEMA_DIR / f"{schema_name}.schema.json"
    schema = json.loads(schema_path.read_text(encoding="utf-8"))
    try:
        jsonschema.validate(instance=obj, schema=schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"{schema_name} report fails its schema at {where}: {exc.message}") from None


def write_json(path: Path, obj: Any, schema_name: str | None = None) -> Path:
    obj = _clean(obj)
    if schema_name is not None:
        validate_document(obj, schema_name)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def git_sha() -> str:
    try:
        proc = subprocess.run(["git", "rev-parse", "HEAD"], capture_output=True, text=True, check=False)
    except OSError:
        return "unknown"
    if proc.returncode != 0:
        return "unknown"
    return proc.stdout.strip() or "unknown"


def write_manifest(
    out_dir: Path,
    rid: str,
    subcommand: str,
    document: dict[str, Any],
    artifacts: dict[str, Path],
    diagnostics: list[str],
    status: str = "ok",
) -> Path:
    manifest = {
        "run_id": rid,
        "subcommand": subcommand,
        "config": document,
        "git_sha": git_sha(),
        "status": status,
        "artifacts": {name: p.relative_to(out_dir).as_posix() for name, p in sorted(artifacts.items())},
        "diagnostics": list(diagnostics),
    }
    return write_json(out_dir / "manifest.json", manifest, "manifest")
