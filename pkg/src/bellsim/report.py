"""Deterministic report rendering.

A report is an ordered list of scalar fields plus an optional table. The
same report renders as key:value text, as CSV (fields become leading
comment lines so every output embeds its configuration), or as JSON.
Rationals render as num/den strings and floats with 12 significant
digits, so identical configurations always produce byte-identical output.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from fractions import Fraction


def format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


@dataclass
class Report:
    fields: list[tuple[str, object]] = field(default_factory=list)
    columns: list[str] = field(default_factory=list)
    rows: list[list[object]] = field(default_factory=list)

    def add(self, key: str, value: object) -> None:
        self.fields.append((key, value))

    def add_row(self, *values: object) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(list(values))


FORMATS = ("text", "csv", "json")


def emit_report(report: Report, fmt: str) -> str:
    if fmt == "text":
        return _emit_text(report)
    if fmt == "csv":
        return _emit_csv(report)
    if fmt == "json":
        return _emit_json(report)
    raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


def _emit_text(report: Report) -> str:
    out = io.StringIO()
    for key, value in report.fields:
        out.write(f"{key}: {format_value(value)}\n")
    if report.columns:
        out.write(",".join(report.columns) + "\n")
        for row in report.rows:
            out.write(",".join(format_value(v) for v in row) + "\n")
    return out.getvalue()


def _emit_csv(report: Report) -> str:
    out = io.StringIO()
    for key, value in report.fields:
        out.write(f"# {key}: {format_value(value)}\n")
    if report.columns:
        out.write(",".join(report.columns) + "\n")
        for row in report.rows:
            out.write(",".join(format_value(v) for v in row) + "\n")
    return out.getvalue()


def _emit_json(report: Report) -> str:
    def jsonable(value: object) -> object:
        if isinstance(value, Fraction):
            return str(value)
        if isinstance(value, float):
            return float(format(value, ".12g"))
        return value

    doc: dict[str, object] = {key: jsonable(value) for key, value in report.fields}
    if report.columns:
        doc["rows"] = [
            {col: jsonable(v) for col, v in zip(report.columns, row)} for row in report.rows
        ]
    return json.dumps(doc, indent=2) + "\n"
