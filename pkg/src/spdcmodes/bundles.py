"""Delimited text output bundles.

A bundle is a directory of tab-separated tables with deterministic file
names. Every table starts with a comment block: a `# kind:` line naming
the table, optional `# <key>: <value>` provenance lines (sorted), then the
column header. Numbers are written with 9 significant digits, enough to
round-trip float32 data and reproduce double-precision results to well
below any tolerance used downstream.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError, FormatError

__all__ = [
    "format_cell",
    "write_table",
    "read_table",
    "column_floats",
    "write_settings_echo",
]


def format_cell(x) -> str:
    if isinstance(x, str):
        if "\t" in x or "\n" in x:
            raise DataError(f"cell value {x!r} contains a delimiter")
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def write_table(
    path: str | Path,
    columns: list[str],
    rows,
    kind: str,
    provenance: dict | None = None,
) -> Path:
    """Write one delimited table; returns the path written."""
    path = Path(path)
    rows = list(rows)
    for r in rows:
        if len(r) != len(columns):
            raise DataError(
                f"row width {len(r)} does not match {len(columns)} columns in {path.name}"
            )
    lines = [f"# kind: {kind}"]
    for key in sorted(provenance or {}):
        val = str((provenance or {})[key]).replace("\n", " ")
        lines.append(f"# {key}: {val}")
    lines.append("\t".join(columns))
    for r in rows:
        lines.append("\t".join(format_cell(v) for v in r))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_table(path: str | Path):
    """Parse a table written by write_table.

    Returns (kind, provenance dict, column names, rows) where rows is a
    list of string lists. Use column_floats for numeric access. Raises
    FormatError on structural problems.
    """
    path = Path(path)
    kind = None
    provenance: dict[str, str] = {}
    columns: list[str] | None = None
    rows: list[list[str]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            if columns is not None:
                raise FormatError(f"{path.name}, line {lineno}: comment after header")
            body = line[1:].strip()
            key, sep, value = body.partition(":")
            if not sep:
                raise FormatError(f"{path.name}, line {lineno}: malformed comment")
            if key.strip() == "kind":
                kind = value.strip()
            else:
                provenance[key.strip()] = value.strip()
            continue
        if columns is None:
            columns = line.split("\t")
            continue
        parts = line.split("\t")
        if len(parts) != len(columns):
            raise FormatError(
                f"{path.name}, line {lineno}: {len(parts)} fields, expected {len(columns)}"
            )
        rows.append(parts)
    if kind is None or columns is None:
        raise FormatError(f"{path.name}: missing kind line or column header")
    return kind, provenance, columns, rows


def column_floats(columns: list[str], rows: list[list[str]], name: str) -> np.ndarray:
    """One named column as floats."""
    try:
        idx = columns.index(name)
    except ValueError as exc:
        raise FormatError(f"no column named {name!r}") from exc
    try:
        return np.asarray([float(r[idx]) for r in rows])
    except ValueError as exc:
        raise FormatError(f"column {name!r} is not numeric: {exc}") from exc


def write_settings_echo(directory: str | Path, echo: dict[str, str]) -> Path:
    """Write the effective settings next to the tables, round-trippable."""
    path = Path(directory) / "settings_used.txt"
    lines = ["# effective run settings"]
    lines.extend(f"{k}={echo[k]}" for k in sorted(echo))
    path.write_text("\n".join(lines) + "\n")
    return path
