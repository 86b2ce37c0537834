"""Plain-text vector and matrix files.

Vector: one value per line, ``%.17g`` (round-trips every float64 exactly).
Matrix: a header line ``rows cols`` followed by one line per row, values
separated by single spaces, row-major.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

FMT = "%.17g"


class FileFormatError(ValueError):
    pass


def _fmt(values) -> list[str]:
    return [FMT % v for v in values]


def write_vector(path, v) -> Path:
    path = Path(path)
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("write_vector expects a 1-d array")
    path.write_text("".join(s + "\n" for s in _fmt(v)))
    return path


def read_vector(path) -> np.ndarray:
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines()]
    try:
        return np.array([float(ln) for ln in lines if ln], dtype=np.float64)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from None


def write_matrix(path, a) -> Path:
    path = Path(path)
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("write_matrix expects a 2-d array")
    rows = [f"{a.shape[0]} {a.shape[1]}"]
    rows.extend(" ".join(_fmt(r)) for r in a)
    path.write_text("\n".join(rows) + "\n")
    return path


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise FileFormatError(f"{path}: header must be 'rows cols'")
        try:
            rows, cols = int(header[0]), int(header[1])
        except ValueError:
            raise FileFormatError(f"{path}: header must hold two integers") from None
        try:
            values = np.array(fh.read().split(), dtype=np.float64)
        except ValueError as exc:
            raise FileFormatError(f"{path}: {exc}") from None
    if values.size != rows * cols:
        raise FileFormatError(f"{path}: expected {rows * cols} values, found {values.size}")
    return values.reshape(rows, cols)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([FMT % x if isinstance(x, float) else x for x in r])
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())
