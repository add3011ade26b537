"""File formats: curve snapshots (CSV), EOC tables (CSV) and run reports (JSON).

All writers go through :func:`atomic_write` so a file either appears complete
or not at all.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

CURVE_HEADER = ("rho", "x1", "x2")
EOC_HEADER = ("J", "err_0h", "eoc_0h", "err_1h", "eoc_1h")


class CurveFormatError(ValueError):
    pass


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(v: float) -> str:
    return format(float(v), ".17g")


# curves ------------------------------------------------------------------------

def curve_csv_text(nodes) -> str:
    nodes = np.asarray(getattr(nodes, "nodes", nodes), dtype=float)
    J = nodes.shape[0] - 1
    rho = np.arange(J + 1) / J
    buf = io.StringIO()
    buf.write(",".join(CURVE_HEADER) + "\n")
    for r, (x1, x2) in zip(rho, nodes):
        buf.write(f"{fmt(r)},{fmt(x1)},{fmt(x2)}\n")
    return buf.getvalue()


def write_curve_csv(path, nodes) -> Path:
    return atomic_write(path, curve_csv_text(nodes))


def parse_curve_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows or tuple(c.strip() for c in rows[0]) != CURVE_HEADER:
        raise CurveFormatError(f"curve CSV must start with header {','.join(CURVE_HEADER)}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise CurveFormatError(f"non-numeric entry in curve CSV: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 3:
        raise CurveFormatError("curve CSV rows must have exactly three columns")
    if data.shape[0] < 3:
        raise CurveFormatError(f"curve CSV needs at least 3 nodes, got {data.shape[0]}")
    if not np.all(np.isfinite(data)):
        raise CurveFormatError("curve CSV contains non-finite values")
    if np.any(np.diff(data[:, 0]) <= 0.0):
        raise CurveFormatError("rho column must be strictly increasing")
    return data[:, 1:]


def read_curve_csv(path) -> np.ndarray:
    """Nodes ``(J+1, 2)`` from a curve snapshot file."""
    return parse_curve_csv(Path(path).read_text())


# EOC tables ------------------------------------------------------------------

def eoc_csv_text(rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(EOC_HEADER) + "\n")
    for r in rows:
        cells = [str(r.J)]
        for norm in ("0h", "1h"):
            cells.append(fmt(r.errors[norm]))
            e = r.eoc.get(norm)
            cells.append("" if e is None else f"{e:.4f}")
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def write_eoc_csv(path, rows) -> Path:
    return atomic_write(path, eoc_csv_text(rows))


def read_eoc_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            out.append({k: (int(v) if k == "J" else (float(v) if v != "" else None))
                        for k, v in row.items()})
    return out


# reports -------------------------------------------------------------------

def to_jsonable(obj):
    """Plain JSON types; non-finite floats become ``None``."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def report_text(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(path, report: dict) -> Path:
    return atomic_write(path, report_text(report))


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())
