"""Flat result rows and their CSV / JSON-lines serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import astuple, dataclass, fields

COLUMNS = ("mode", "n", "m", "gamma", "base", "direction", "r", "index", "vol", "surf",
           "count", "analytic_mean", "analytic_var", "seed")
AGGREGATE_INDEX = -1

_INT = {"n", "m", "index", "count"}
_FLOAT = {"gamma", "r", "vol", "surf", "analytic_mean", "analytic_var"}


@dataclass(frozen=True)
class ResultRecord:
    """
    One output row. ``index`` is the realization index, or -1 for rows that
    aggregate over realizations. Derived quantities carry a ``mode:quantity``
    tag in ``mode`` and their value in ``vol``.
    """

    mode: str
    n: int
    m: int
    gamma: float
    base: str
    direction: str
    r: float | None
    index: int
    vol: float | None = None
    surf: float | None = None
    count: int | None = None
    analytic_mean: float | None = None
    analytic_var: float | None = None
    seed: str = ""

    def sort_key(self):
        r = -math.inf if self.r is None else self.r
        return (r, self.index)


assert tuple(f.name for f in fields(ResultRecord)) == COLUMNS


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def _normalize(rec: ResultRecord) -> tuple:
    out = []
    for name, v in zip(COLUMNS, astuple(rec)):
        if v is not None and name in _FLOAT:
            v = float(v)
        elif v is not None and name in _INT:
            v = int(v)
        out.append(v)
    return tuple(out)


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for rec in records:
        w.writerow([format_value(v) for v in _normalize(rec)])
    return buf.getvalue()


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, float):
        if not math.isfinite(v):
            return json.dumps(format_value(v))
        return format_value(v)
    if isinstance(v, int):
        return str(v)
    return json.dumps(v)


def to_jsonlines(records) -> str:
    lines = []
    for rec in records:
        items = ", ".join(f"{json.dumps(k)}: {_json_value(v)}"
                          for k, v in zip(COLUMNS, _normalize(rec)))
        lines.append("{" + items + "}")
    return "".join(line + "\n" for line in lines)


def emit(records, fmt: str, path: str) -> None:
    """Write records to ``path``. Raises OSError on I/O failure."""
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "jsonlines":
        text = to_jsonlines(records)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _parse_cell(name: str, s):
    if s is None or s == "":
        return None
    if name in _INT:
        return int(s)
    if name in _FLOAT:
        return float(s)
    return s


def parse_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError("unexpected CSV header")
    return [ResultRecord(*[_parse_cell(k, v) for k, v in zip(COLUMNS, row)]) for row in rows[1:]]


def parse_jsonlines(text: str) -> list:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        vals = []
        for k in COLUMNS:
            v = obj.get(k)
            vals.append(_parse_cell(k, v) if isinstance(v, str) and k not in
                        ("mode", "base", "direction", "seed") else v)
        out.append(ResultRecord(*vals))
    return out


def read_records(path: str, fmt: str | None = None) -> list:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    fmt = fmt or ("jsonlines" if path.endswith((".jsonl", ".jsonlines")) else "csv")
    return parse_csv(text) if fmt == "csv" else parse_jsonlines(text)
