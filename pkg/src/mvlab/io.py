"""CSV/JSON serialization of ledgers, segmentations and snapshots.

Every writer goes through :func:`atomic_write_text`, which writes a sibling
temporary file and renames it over the target.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .ledger import LEDGER_COLUMNS, EnergyLedger
from .regimes import RegimeSegmentation

__all__ = [
    "atomic_write_text",
    "rows_to_csv",
    "format_float",
    "ledger_to_csv",
    "ledger_from_csv",
    "write_ledger",
    "read_ledger",
    "write_segmentation",
    "read_segmentation",
    "snapshots_to_csv",
    "read_snapshots",
    "write_snapshots",
    "write_json",
    "dumps_json",
]


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any float64."""
    return format(float(x), ".17g")


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) for v in row])
    return buf.getvalue()


def ledger_to_csv(ledger: EnergyLedger) -> str:
    return rows_to_csv(LEDGER_COLUMNS, ledger.as_array())


def ledger_from_csv(text: str) -> EnergyLedger:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != LEDGER_COLUMNS:
        raise ValueError(f"unexpected ledger header {header!r}")
    return EnergyLedger.from_array([float(v) for v in row] for row in reader if row)


def write_ledger(path, ledger: EnergyLedger) -> None:
    atomic_write_text(path, ledger_to_csv(ledger))


def read_ledger(path) -> EnergyLedger:
    return ledger_from_csv(Path(path).read_text(encoding="utf-8"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps_json(data) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path, data) -> None:
    atomic_write_text(path, dumps_json(data))


def write_segmentation(path, seg: RegimeSegmentation) -> None:
    write_json(path, seg.to_dict())


def read_segmentation(path) -> RegimeSegmentation:
    return RegimeSegmentation.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def snapshots_to_csv(snapshots) -> str:
    """Long-format ``t,x,rho`` rows from ``(t, field)`` pairs."""
    rows = []
    for t, fld in snapshots:
        for x, r in zip(fld.grid.centers, fld.values):
            rows.append((t, x, r))
    return rows_to_csv(("t", "x", "rho"), rows)


def write_snapshots(path, snapshots) -> None:
    atomic_write_text(path, snapshots_to_csv(snapshots))


def read_snapshots(path) -> dict[float, tuple[np.ndarray, np.ndarray]]:
    """Map each snapshot time to ``(x, rho)`` arrays."""
    out: dict[float, tuple[list, list]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            xs, rs = out.setdefault(float(row["t"]), ([], []))
            xs.append(float(row["x"]))
            rs.append(float(row["rho"]))
    return {t: (np.array(xs), np.array(rs)) for t, (xs, rs) in out.items()}
