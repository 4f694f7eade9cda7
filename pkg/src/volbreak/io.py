"""Price panel ingestion and structured result emission.

Input is a wide CSV, one trading day per row: a ``date`` column followed
by the K+1 intraday prices ``p0..pK``. Validation is strict; nothing is
imputed or reordered, and every parse error names the offending line.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .panels import PricePanel

__all__ = ["ingest_prices", "write_panel_csv", "write_table_csv", "dump_json"]


def ingest_prices(path) -> PricePanel:
    """Read and validate a wide price CSV into a panel."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc

    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise DataFormatError(f"{path}: empty file", line=1)

    header = [cell.strip() for cell in rows[0]]
    expected = ["date"] + [f"p{i}" for i in range(len(header) - 1)]
    if len(header) < 4 or header != expected:
        raise DataFormatError(
            f"{path}: header must be 'date,p0,p1,...,pK' with K >= 2, got {','.join(header)}",
            line=1,
        )
    n_cols = len(header) - 1

    days: list[str] = []
    prices: list[list[float]] = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != n_cols + 1:
            raise DataFormatError(
                f"{path}: expected {n_cols + 1} fields, got {len(row)}", line=line_no
            )
        day = row[0].strip()
        if not day:
            raise DataFormatError(f"{path}: missing date", line=line_no)
        values = []
        for col, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                raise DataFormatError(
                    f"{path}: missing price in column p{col}", line=line_no
                )
            try:
                value = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: invalid price {cell!r} in column p{col}", line=line_no
                ) from None
            if not np.isfinite(value) or value <= 0.0:
                raise DataFormatError(
                    f"{path}: nonpositive price {cell} in column p{col}", line=line_no
                )
            values.append(value)
        days.append(day)
        prices.append(values)

    if not prices:
        raise DataFormatError(f"{path}: no data rows", line=1)
    try:
        return PricePanel(tuple(days), np.asarray(prices))
    except DataFormatError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def write_panel_csv(panel: PricePanel, path) -> None:
    """Write a panel back to the wide CSV format (lossless round trip)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date"] + [f"p{i}" for i in range(panel.k_intervals + 1)])
        for day, row in zip(panel.days, panel.prices):
            writer.writerow([day] + [repr(float(v)) for v in row])


def write_table_csv(rows: list[dict], path_or_handle) -> None:
    """Write experiment table rows as CSV with a stable column order."""
    if not rows:
        raise ValueError("no rows to write")
    columns = list(rows[0].keys())
    if hasattr(path_or_handle, "write"):
        _write_rows(path_or_handle, columns, rows)
    else:
        with Path(path_or_handle).open("w", encoding="utf-8", newline="") as fh:
            _write_rows(fh, columns, rows)


def _write_rows(fh, columns, rows) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[c]) for c in columns])


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_json(payload: dict, path=None) -> str:
    """Serialize a report deterministically; write it if a path is given."""
    text = json.dumps(payload, indent=2, sort_keys=False, allow_nan=False)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
