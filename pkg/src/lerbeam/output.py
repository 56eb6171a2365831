"""CSV and JSON writers with a provenance header.

Every file starts with ``#`` comment lines carrying the toolkit version,
the config hash and the dB convention.  Floats are written with 17
significant digits, so a value read back is bit-identical.  Nothing
time-dependent goes into CSV files; identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import math
import os

from ._version import __version__

DB_NOTE = "powers in dB relative to MRT (10 log10), lengths in wavelengths"
TRUNCATION_MARKER = "# TRUNCATED"


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def header_lines(config_hash: str, extra: dict | None = None) -> list[str]:
    lines = [f"# lerbeam {__version__}", f"# config_hash {config_hash}", f"# {DB_NOTE}"]
    for k, v in (extra or {}).items():
        lines.append(f"# {k} {fmt(v)}")
    return lines


class CsvWriter:
    """Row-by-row CSV writer.

    Rows are flushed as they arrive.  Leaving the ``with`` block through an
    exception appends a truncation marker, so an interrupted sweep leaves a
    readable partial file.

    Examples
    --------
    >>> with CsvWriter(path, ["j", "sigma_rel"], "abc123") as out:   # doctest: +SKIP
    ...     out.row(1, 1.0)
    """

    def __init__(self, path, columns, config_hash: str, extra: dict | None = None):
        self.path = os.fspath(path)
        self.columns = list(columns)
        self.config_hash = config_hash
        self.extra = extra
        self.n_rows = 0
        self._fh = None

    def __enter__(self):
        self._fh = open(self.path, "w", encoding="utf-8", newline="\n")
        for line in header_lines(self.config_hash, self.extra):
            self._fh.write(line + "\n")
        self._fh.write(",".join(self.columns) + "\n")
        return self

    def row(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self._fh.write(",".join(fmt(v) for v in values) + "\n")
        self._fh.flush()
        self.n_rows += 1

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self._fh.write(f"{TRUNCATION_MARKER} after {self.n_rows} rows ({exc_type.__name__})\n")
        self._fh.close()
        return False


def write_csv(path, columns, rows, config_hash: str, extra: dict | None = None) -> int:
    with CsvWriter(path, columns, config_hash, extra) as out:
        for r in rows:
            out.row(*r)
    return out.n_rows


def read_csv(path) -> tuple[list[str], list[list[str]], list[str]]:
    """Return ``(columns, rows, comments)``; values stay strings."""
    comments, rows, columns = [], [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                comments.append(line)
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append(line.split(","))
    return columns or [], rows, comments


def _strict(v):
    # JSON has no NaN/inf; write null instead
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _strict(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_strict(x) for x in v]
    return v


def write_json(path, payload: dict, config_hash: str) -> None:
    """Write ``payload`` after the provenance keys (JSON has no comments)."""
    doc = {"lerbeam_version": __version__, "config_hash": config_hash, "db_convention": DB_NOTE}
    doc.update(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_strict(doc), fh, indent=2, allow_nan=False)
        fh.write("\n")
