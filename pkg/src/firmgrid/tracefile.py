"""Single-column hourly trace files.

One value per line, no header. Lines starting with ``#`` are metadata of the
form ``# key: value`` (for example ``# technology: wind``) and are only
allowed before the first value.
"""

from __future__ import annotations

import numpy as np

from firmgrid.errors import TraceLengthError, TraceParseError

HOURS = 8760


def read_trace(path, expected_length: int = HOURS) -> tuple[np.ndarray, dict[str, str]]:
    meta: dict[str, str] = {}
    values: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if values:
                    raise TraceParseError(f"{path}:{lineno}: metadata after data")
                key, sep, val = line[1:].partition(":")
                if sep:
                    meta[key.strip().lower()] = val.strip()
                continue
            cell = line.split(",")[0].strip()
            try:
                values.append(float(cell))
            except ValueError:
                raise TraceParseError(f"{path}:{lineno}: non-numeric value {cell!r}") from None
    if len(values) != expected_length:
        raise TraceLengthError(f"{path}: expected {expected_length} rows, found {len(values)}")
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise TraceParseError(f"{path}: non-finite value")
    return arr, meta


def write_trace(path, values, meta: dict[str, str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in (meta or {}).items():
            fh.write(f"# {key}: {val}\n")
        for v in np.asarray(values, dtype=float).tolist():
            fh.write(f"{v!r}\n")
