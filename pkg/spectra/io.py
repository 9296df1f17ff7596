"""Data-matrix files.

CSV: header-free, one row per variable, one column per observation.
Binary: little-endian uint64 p, uint64 n, then p*n float64 in column-major order.
"""

from __future__ import annotations

import csv
import logging
import math
import struct
from pathlib import Path

import numpy as np

from schemas.errors import ValidationError

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<QQ")


def read_csv_matrix(path: str | Path) -> np.ndarray:
    path = Path(path)
    rows: list[list[float]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                row = [float(cell) for cell in record]
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: non-numeric entry ({exc})") from None
            if not all(math.isfinite(x) for x in row):
                raise ValidationError(f"{path}: line {lineno}: non-finite entry")
            if rows and len(row) != len(rows[0]):
                raise ValidationError(f"{path}: line {lineno}: expected {len(rows[0])} columns, found {len(row)}")
            rows.append(row)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    logger.debug("read %d x %d matrix from %s", len(rows), len(rows[0]), path)
    return np.asarray(rows, dtype=float)


def write_csv_matrix(path: str | Path, data: np.ndarray) -> None:
    y = np.asarray(data, dtype=float)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in y:
            writer.writerow([format(x, ".17g") for x in row])


def read_binary_matrix(path: str | Path) -> np.ndarray:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated header ({len(raw)} bytes)")
    p, n = _HEADER.unpack_from(raw)
    expected = _HEADER.size + 8 * p * n
    if p == 0 or n == 0:
        raise ValidationError(f"{path}: empty dimensions p={p} n={n}")
    if len(raw) != expected:
        raise ValidationError(f"{path}: expected {expected} bytes for p={p} n={n}, found {len(raw)}")
    flat = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if not np.all(np.isfinite(flat)):
        raise ValidationError(f"{path}: non-finite entry")
    return flat.reshape((p, n), order="F").astype(float)


def write_binary_matrix(path: str | Path, data: np.ndarray) -> None:
    y = np.asarray(data, dtype="<f8")
    p, n = y.shape
    Path(path).write_bytes(_HEADER.pack(p, n) + y.tobytes(order="F"))


def read_data_matrix(path: str | Path, fmt: str = "auto") -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"data file not found: {path}")
    if fmt == "auto":
        fmt = "csv" if path.suffix.lower() in (".csv", ".txt") else "binary"
    if fmt == "csv":
        return read_csv_matrix(path)
    if fmt == "binary":
        return read_binary_matrix(path)
    raise ValidationError(f"unknown data format {fmt!r}")
