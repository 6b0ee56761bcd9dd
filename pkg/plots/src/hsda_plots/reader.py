"""Parsing of solver trace CSVs (plain and merged comparison format).

The trace format is the wire contract with the solver harness: a header
row of fixed columns, one row per outer iteration plus a final-state row,
'.' decimals, and empty cells where a quantity is undefined (for example
the optimality gap when a problem has no closed form). Merged comparison
files share the leading iteration column and prefix every other column
with an algorithm label, as in ``hsda.f_gap``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

#: Column schema of a plain trace file, in order.
TRACE_COLUMNS = ("t", "f_gap", "grad_norm", "v_abs", "delta_or_zeta",
                 "step_norm", "inner_iters", "lanczos_iters", "hvp_cum",
                 "wall_ms")


class SchemaError(Exception):
    """The file does not parse as a trace CSV."""


@dataclass
class TraceSeries:
    """One algorithm's per-iteration columns, aligned with ``t``."""

    label: str
    t: list[int] = field(default_factory=list)
    columns: dict[str, list[float | None]] = field(default_factory=dict)

    def has_values(self, column: str) -> bool:
        return any(v is not None for v in self.columns.get(column, []))


def _parse_cell(cell: str, path: str, lineno: int) -> float | None:
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError as err:
        raise SchemaError(
            f"{path}:{lineno}: cell '{cell}' is not a number") from err


def _read_rows(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh]
    except OSError as err:
        raise SchemaError(f"cannot read {path}: {err}") from err
    lines = [line for line in lines if line.strip()]
    if not lines:
        raise SchemaError(f"{path}: empty trace file")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}:{i}: expected {len(header)} cells, "
                              f"got {len(row)}")
    return header, rows


def parse_trace(path: str) -> list[TraceSeries]:
    """Parse a plain or merged trace CSV into per-algorithm series."""
    header, rows = _read_rows(path)
    value_cols = list(TRACE_COLUMNS[1:])

    if header == list(TRACE_COLUMNS):
        groups = {"": value_cols}
    elif header[0] == "t" and all("." in col for col in header[1:]):
        groups = {}
        for col in header[1:]:
            label, _, name = col.partition(".")
            if name not in value_cols:
                raise SchemaError(f"{path}: unknown trace column '{col}'")
            groups.setdefault(label, []).append(name)
        for label, names in groups.items():
            if names != value_cols:
                raise SchemaError(
                    f"{path}: column group '{label}' does not match the "
                    "trace schema")
    else:
        raise SchemaError(f"{path}: unrecognized trace header {header!r}")

    series_by_label = {
        label: TraceSeries(label=label,
                           columns={name: [] for name in value_cols})
        for label in groups
    }
    col_index = {col: i for i, col in enumerate(header)}
    for lineno, row in enumerate(rows, start=2):
        try:
            t = int(row[0])
        except ValueError as err:
            raise SchemaError(
                f"{path}:{lineno}: iteration index '{row[0]}'") from err
        for label, series in series_by_label.items():
            prefix = f"{label}." if label else ""
            values = [_parse_cell(row[col_index[prefix + name]], path, lineno)
                      for name in value_cols]
            if all(v is None for v in values):
                continue   # merged rows outside this run's range
            series.t.append(t)
            for name, v in zip(value_cols, values):
                series.columns[name].append(v)
    return list(series_by_label.values())
