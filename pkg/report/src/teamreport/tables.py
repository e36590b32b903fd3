"""Formatted tables from table-preset aggregates.

Markdown output mirrors the aggregate values at four decimals with the
interval half-width in parentheses on the line beneath, and puts the
highest value of every value column in bold, one emphasis per column.
"""

from __future__ import annotations

import math
import re

from .schema import (
    MODE_LABELS,
    MODE_ORDER,
    STRUCTURE_ORDER,
    TAU_LABELS,
    TAU_ORDER,
    SchemaError,
    aggregate_text,
)

VALUE = "{:.4f}"
CI = "(+-{:.4f})"


def render_tables(rows: list[dict], preset: str, out_path: str | None = None, fmt: str = "md") -> str:
    """Render a table preset to markdown, or pass the aggregate through as
    CSV. Returns the rendered text; writes it when out_path is given."""
    if fmt == "csv":
        text = aggregate_text(rows, preset)
    elif fmt != "md":
        raise SchemaError(f"table format must be md or csv, got {fmt!r}")
    elif preset == "table2":
        text = _table2(rows)
    elif preset in ("table3", "table4"):
        text = _table34(rows, preset)
    else:
        raise SchemaError(f"preset {preset!r} is not a table preset")
    if out_path is not None:
        with open(out_path, "w") as fh:
            fh.write(text)
    return text


def _cell_block(values: list[float], cis: list[float], bold: list[bool]) -> tuple[list[str], list[str]]:
    tops, bottoms = [], []
    for v, ci, b in zip(values, cis, bold):
        s = VALUE.format(v)
        tops.append(f"**{s}**" if b else s)
        bottoms.append(CI.format(ci))
    return tops, bottoms


def _emit(header: list[str], body: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join([" --- "] * len(header)) + "|"]
    for row in body:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _require(by_key: dict, key: tuple, preset: str) -> dict:
    row = by_key.get(key)
    if row is None:
        raise SchemaError(f"{preset} aggregate lacks the cell {key}")
    return row


def _table2(rows: list[dict]) -> str:
    """Mode rows; mean and final blocks across the three tenures."""
    by_key = {(r["mode"], r["tau"]): r for r in rows}
    columns = [(which, tau) for which in ("mean_perf", "final_perf") for tau in TAU_ORDER]
    grid = [
        [_require(by_key, (mode, tau), "table2")[which] for which, tau in columns]
        for mode in MODE_ORDER
    ]
    cis = [
        [
            _require(by_key, (mode, tau), "table2")[which.replace("perf", "ci")]
            for which, tau in columns
        ]
        for mode in MODE_ORDER
    ]
    maxima = [max(grid[r][c] for r in range(len(MODE_ORDER))) for c in range(len(columns))]

    header = ["mode"]
    for which, tau in columns:
        word = "mean" if which == "mean_perf" else "final"
        header.append(f"{word}, tau = {tau:g}")
    body = []
    for r, mode in enumerate(MODE_ORDER):
        bold = [grid[r][c] == maxima[c] for c in range(len(columns))]
        tops, bottoms = _cell_block(grid[r], cis[r], bold)
        body.append([MODE_LABELS[mode]] + tops)
        body.append([""] + bottoms)
    return _emit(header, body)


def _table34(rows: list[dict], preset: str) -> str:
    """One block per tenure: mode rows against structure columns."""
    by_key = {(r["tau"], r["mode"], r["structure"]): r for r in rows}
    chunks = []
    for tau in TAU_ORDER:
        grid = [
            [_require(by_key, (tau, mode, s), preset)["mean_perf"] for s in STRUCTURE_ORDER]
            for mode in MODE_ORDER
        ]
        cis = [
            [_require(by_key, (tau, mode, s), preset)["mean_ci"] for s in STRUCTURE_ORDER]
            for mode in MODE_ORDER
        ]
        maxima = [max(grid[r][c] for r in range(len(MODE_ORDER))) for c in range(len(STRUCTURE_ORDER))]
        header = ["mode"] + list(STRUCTURE_ORDER)
        body = []
        for r, mode in enumerate(MODE_ORDER):
            bold = [grid[r][c] == maxima[c] for c in range(len(STRUCTURE_ORDER))]
            tops, bottoms = _cell_block(grid[r], cis[r], bold)
            body.append([MODE_LABELS[mode]] + tops)
            body.append([""] + bottoms)
        chunks.append(f"### {TAU_LABELS[tau]}\n\n" + _emit(header, body))
    return "\n".join(chunks)


_NUMBER = re.compile(r"\*\*(\d+\.\d{4})\*\*|(?<![-+(*\d])(\d+\.\d{4})(?![\d*])")


def iter_table_numbers(md_text: str):
    """Every plain value cell in a rendered markdown table, in order;
    interval lines in parentheses are skipped."""
    for line in md_text.splitlines():
        if "(+-" in line:
            continue
        for match in _NUMBER.finditer(line):
            yield float(match.group(1) or match.group(2))
