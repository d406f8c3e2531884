"""File formats for records, bounds, intervals, decisions, and result tables.

Two interchangeable formats carry every artifact: CSV with a fixed header,
and JSON as an array of row objects mirroring the CSV columns (decisions and
intervals, being single rows, serialize as one object). Floats are written
with repr precision so a write-read round trip reproduces values exactly.
Writes are atomic: content lands in a temporary file in the destination
directory and is renamed into place, so a failed write never leaves a
partial file behind.

Schemas:
  discrete records   t, z, r, G
  noise records      t, z, epsilon
  arm records        t, a, psi
  bounds             t, estimate, lower, upper
  interval           n, lower, upper
  decision           alpha, rejected, first_rejection
  result table       t, method, mean_width, miscoverage, mean_lower,
                     mean_upper, replications
  raw values         x (plus an arm column a where arms apply)
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from typing import Sequence

import numpy as np

from .abtest import ABRecord
from .confseq import BoundSeries, Interval
from .eprocess import TestDecision
from .experiments import ResultRow, ResultTable
from .mechanisms import LaplaceBatch, RecordBatch

__all__ = [
    "FORMATS",
    "write_records",
    "read_records",
    "write_ab_records",
    "read_ab_records",
    "write_bounds",
    "read_bounds",
    "write_interval",
    "read_interval",
    "write_decision",
    "read_decision",
    "write_table",
    "read_table",
    "read_values",
    "write_values",
    "values_equal",
]

FORMATS = ("csv", "json")

_DISCRETE_HEADER = ["t", "z", "r", "G"]
_NOISE_HEADER = ["t", "z", "epsilon"]
_ARM_HEADER = ["t", "a", "psi"]
_BOUNDS_HEADER = ["t", "estimate", "lower", "upper"]
_INTERVAL_HEADER = ["n", "lower", "upper"]
_DECISION_HEADER = ["alpha", "rejected", "first_rejection"]
_TABLE_HEADER = [
    "t",
    "method",
    "mean_width",
    "miscoverage",
    "mean_lower",
    "mean_upper",
    "replications",
]


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
    return fmt


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".partial-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=True) + "\n"


def _read_text(path: str) -> str:
    try:
        with open(path, "r", newline="") as handle:
            return handle.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc


def _parse_csv(path: str, header: Sequence[str]) -> list[dict[str, str]]:
    reader = csv.reader(io.StringIO(_read_text(path)))
    try:
        got = next(reader)
    except StopIteration:
        raise ValueError(f"{path}: empty file, expected header {','.join(header)}")
    if got != list(header):
        raise ValueError(
            f"{path}: expected header {','.join(header)!r}, got {','.join(got)!r}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
            )
        rows.append(dict(zip(header, row)))
    return rows


def _load_json_array(path: str) -> list:
    try:
        payload = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(payload, list):
        raise ValueError(f"{path}: expected a JSON array of row objects")
    return payload


def _check_json_rows(path: str, payload: list, header: Sequence[str]) -> list[dict]:
    for i, row in enumerate(payload):
        if not isinstance(row, dict) or set(row) != set(header):
            raise ValueError(
                f"{path}: row {i} must be an object with keys {sorted(header)}"
            )
    return payload


def _parse_json_rows(path: str, header: Sequence[str]) -> list[dict]:
    return _check_json_rows(path, _load_json_array(path), header)


def _rows(path: str, fmt: str, header: Sequence[str]) -> list[dict]:
    if _check_format(fmt) == "csv":
        return _parse_csv(path, header)
    return _parse_json_rows(path, header)


def _number(path: str, row: dict, key: str, kind=float):
    try:
        return kind(row[key])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: field {key!r} has non-numeric value {row[key]!r}") from exc


def write_records(path: str, records, fmt: str = "csv") -> None:
    """Write a RecordBatch or LaplaceBatch (or a list of either's records)."""
    _check_format(fmt)
    if isinstance(records, list):
        records = (
            LaplaceBatch.from_records(records)
            if records and hasattr(records[0], "epsilon")
            else RecordBatch.from_records(records)
        )
    if isinstance(records, RecordBatch):
        header = _DISCRETE_HEADER
        rows = [
            [t + 1, float(z), float(r), int(G)]
            for t, (z, r, G) in enumerate(zip(records.z, records.r, records.G))
        ]
    elif isinstance(records, LaplaceBatch):
        header = _NOISE_HEADER
        rows = [
            [t + 1, float(z), float(eps)]
            for t, (z, eps) in enumerate(zip(records.z, records.epsilon))
        ]
    else:
        raise TypeError(f"cannot serialize records of type {type(records).__name__}")
    if fmt == "csv":
        formatted = [
            [repr(v) if isinstance(v, float) else v for v in row] for row in rows
        ]
        _atomic_write(path, _csv_text(header, formatted))
    else:
        _atomic_write(path, _json_text([dict(zip(header, row)) for row in rows]))


def read_records(path: str, fmt: str = "csv"):
    """Read records, returning a RecordBatch or LaplaceBatch per the header.

    An empty row set under the discrete header gives an empty RecordBatch.
    """
    if _check_format(fmt) == "csv":
        text = _read_text(path)
        first = text.splitlines()[0].strip() if text.splitlines() else ""
        header = _NOISE_HEADER if first == ",".join(_NOISE_HEADER) else _DISCRETE_HEADER
        rows = _parse_csv(path, header)
    else:
        payload = _load_json_array(path)
        noisy = bool(payload) and isinstance(payload[0], dict) and "epsilon" in payload[0]
        header = _NOISE_HEADER if noisy else _DISCRETE_HEADER
        rows = _check_json_rows(path, payload, header)
    if header is _NOISE_HEADER:
        return LaplaceBatch(
            z=np.array([_number(path, row, "z") for row in rows]),
            epsilon=np.array([_number(path, row, "epsilon") for row in rows]),
        )
    return RecordBatch(
        z=np.array([_number(path, row, "z") for row in rows]),
        r=np.array([_number(path, row, "r") for row in rows]),
        G=np.array([_number(path, row, "G", int) for row in rows], dtype=np.int64),
    )


def write_ab_records(path: str, records: Sequence[ABRecord], fmt: str = "csv") -> None:
    rows = [[rec.index, int(rec.a), float(rec.psi)] for rec in records]
    if _check_format(fmt) == "csv":
        _atomic_write(path, _csv_text(_ARM_HEADER, [[r[0], r[1], repr(r[2])] for r in rows]))
    else:
        _atomic_write(path, _json_text([dict(zip(_ARM_HEADER, row)) for row in rows]))


def read_ab_records(path: str, fmt: str = "csv") -> list[ABRecord]:
    rows = _rows(path, fmt, _ARM_HEADER)
    return [
        ABRecord(
            a=_number(path, row, "a", int),
            psi=_number(path, row, "psi"),
            index=_number(path, row, "t", int),
        )
        for row in rows
    ]


def write_bounds(path: str, series: BoundSeries, fmt: str = "csv") -> None:
    rows = [
        [int(t), float(est), float(lo), float(hi)]
        for t, est, lo, hi in zip(series.t, series.estimate, series.lower, series.upper)
    ]
    if _check_format(fmt) == "csv":
        _atomic_write(
            path,
            _csv_text(
                _BOUNDS_HEADER,
                [[row[0], repr(row[1]), repr(row[2]), repr(row[3])] for row in rows],
            ),
        )
    else:
        _atomic_write(path, _json_text([dict(zip(_BOUNDS_HEADER, row)) for row in rows]))


def read_bounds(path: str, fmt: str = "csv") -> BoundSeries:
    rows = _rows(path, fmt, _BOUNDS_HEADER)
    return BoundSeries(
        t=np.array([_number(path, row, "t", int) for row in rows], dtype=np.int64),
        estimate=np.array([_number(path, row, "estimate") for row in rows]),
        lower=np.array([_number(path, row, "lower") for row in rows]),
        upper=np.array([_number(path, row, "upper") for row in rows]),
    )


def write_interval(path: str, interval: Interval, n: int, fmt: str = "csv") -> None:
    if _check_format(fmt) == "csv":
        _atomic_write(
            path,
            _csv_text(_INTERVAL_HEADER, [[n, repr(interval.lower), repr(interval.upper)]]),
        )
    else:
        _atomic_write(
            path,
            _json_text({"n": n, "lower": interval.lower, "upper": interval.upper}),
        )


def read_interval(path: str, fmt: str = "csv") -> tuple[Interval, int]:
    if _check_format(fmt) == "csv":
        rows = _parse_csv(path, _INTERVAL_HEADER)
        if len(rows) != 1:
            raise ValueError(f"{path}: expected exactly one interval row, got {len(rows)}")
        row = rows[0]
    else:
        row = json.loads(_read_text(path))
        if not isinstance(row, dict) or set(row) != set(_INTERVAL_HEADER):
            raise ValueError(f"{path}: expected one object with keys {_INTERVAL_HEADER}")
    interval = Interval(lower=_number(path, row, "lower"), upper=_number(path, row, "upper"))
    return interval, _number(path, row, "n", int)


def write_decision(path: str, decision: TestDecision, fmt: str = "csv") -> None:
    first = "" if decision.first_rejection is None else decision.first_rejection
    if _check_format(fmt) == "csv":
        _atomic_write(
            path,
            _csv_text(
                _DECISION_HEADER,
                [[repr(decision.alpha), str(decision.rejected).lower(), first]],
            ),
        )
    else:
        _atomic_write(
            path,
            _json_text(
                {
                    "alpha": decision.alpha,
                    "rejected": decision.rejected,
                    "first_rejection": decision.first_rejection,
                }
            ),
        )


def read_decision(path: str, fmt: str = "csv") -> TestDecision:
    if _check_format(fmt) == "csv":
        rows = _parse_csv(path, _DECISION_HEADER)
        if len(rows) != 1:
            raise ValueError(f"{path}: expected exactly one decision row, got {len(rows)}")
        row = rows[0]
        first_raw = row["first_rejection"]
        first = None if first_raw == "" else int(first_raw)
    else:
        row = json.loads(_read_text(path))
        if not isinstance(row, dict) or set(row) != set(_DECISION_HEADER):
            raise ValueError(f"{path}: expected one object with keys {_DECISION_HEADER}")
        first = row["first_rejection"]
        if first is not None:
            first = int(first)
    return TestDecision(alpha=_number(path, row, "alpha"), first_rejection=first)


def write_table(path: str, table: ResultTable, fmt: str = "csv") -> None:
    rows = [
        [
            row.t,
            row.method,
            row.mean_width,
            row.miscoverage,
            row.mean_lower,
            row.mean_upper,
            row.replications,
        ]
        for row in table.rows
    ]
    if _check_format(fmt) == "csv":
        _atomic_write(
            path,
            _csv_text(
                _TABLE_HEADER,
                [
                    [r[0], r[1], repr(r[2]), repr(r[3]), repr(r[4]), repr(r[5]), r[6]]
                    for r in rows
                ],
            ),
        )
    else:
        _atomic_write(path, _json_text([dict(zip(_TABLE_HEADER, row)) for row in rows]))


def read_table(path: str, fmt: str = "csv") -> ResultTable:
    rows = _rows(path, fmt, _TABLE_HEADER)
    return ResultTable(
        rows=tuple(
            ResultRow(
                t=_number(path, row, "t", int),
                method=str(row["method"]),
                mean_width=_number(path, row, "mean_width"),
                miscoverage=_number(path, row, "miscoverage"),
                mean_lower=_number(path, row, "mean_lower"),
                mean_upper=_number(path, row, "mean_upper"),
                replications=_number(path, row, "replications", int),
            )
            for row in rows
        )
    )


def write_values(path: str, x, arms=None, fmt: str = "csv") -> None:
    """Write raw values, optionally with an arm column."""
    x = np.asarray(x, dtype=float)
    if arms is None:
        header, rows = ["x"], [[repr(float(v))] for v in x]
        payload = [{"x": float(v)} for v in x]
    else:
        arms = np.asarray(arms)
        header = ["x", "a"]
        rows = [[repr(float(v)), int(a)] for v, a in zip(x, arms)]
        payload = [{"x": float(v), "a": int(a)} for v, a in zip(x, arms)]
    if _check_format(fmt) == "csv":
        _atomic_write(path, _csv_text(header, rows))
    else:
        _atomic_write(path, _json_text(payload))


def read_values(path: str, fmt: str = "csv") -> tuple[np.ndarray, np.ndarray | None]:
    """Read raw values; returns (x, arms) with arms None when absent."""
    if _check_format(fmt) == "csv":
        text = _read_text(path)
        first = text.splitlines()[0].strip() if text.splitlines() else ""
        header = ["x", "a"] if first == "x,a" else ["x"]
        rows = _parse_csv(path, header)
    else:
        payload = _load_json_array(path)
        with_arms = bool(payload) and isinstance(payload[0], dict) and "a" in payload[0]
        header = ["x", "a"] if with_arms else ["x"]
        rows = _check_json_rows(path, payload, header)
    x = np.array([_number(path, row, "x") for row in rows])
    if "a" in header:
        return x, np.array([_number(path, row, "a", int) for row in rows], dtype=np.int64)
    return x, None


def values_equal(a, b) -> bool:
    """Exact equality for round-trip checks, treating NaN as equal to NaN."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return False
    return bool(np.all((a == b) | (np.isnan(a) & np.isnan(b))))
