"""CSV contracts shared with the simulator, and the aggregation bridge.

Two input shapes are accepted. A per-scenario summary carries the columns
written by `teamsim run`; it is collapsed into grouped rows by calling
`teamsim report --preset <name>`, so every statistic comes from the
simulator's own aggregation. A file that already carries a preset's
aggregate columns is used as-is.
"""

from __future__ import annotations

import csv
import io
import math
import os
import shutil
import subprocess
import sys
import tempfile

SUMMARY_COLUMNS = (
    "scenario_id",
    "mode",
    "k",
    "structure",
    "tau",
    "prob",
    "rounds",
    "mean_perf",
    "mean_ci",
    "final_perf",
    "final_ci",
)

STAT_COLUMNS = ("n_scenarios", "rounds", "mean_perf", "mean_ci", "final_perf", "final_ci")

PRESET_GROUPS = {
    "fig3": ("mode", "tau", "prob"),
    "table2": ("mode", "tau"),
    "table3": ("tau", "mode", "structure"),
    "table4": ("tau", "mode", "structure"),
}

MODE_ORDER = ("fully_autonomous", "sequential", "liaison", "lateral")
STRUCTURE_ORDER = ("block", "centralized", "dependent", "hierarchical", "local", "random")
TAU_ORDER = (math.inf, 10.0, 1.0)

MODE_LABELS = {
    "fully_autonomous": "fully autonomous",
    "sequential": "sequential",
    "liaison": "liaison",
    "lateral": "lateral",
}

TAU_LABELS = {math.inf: "long tenure (tau = inf)", 10.0: "medium tenure (tau = 10)", 1.0: "short tenure (tau = 1)"}


class SchemaError(ValueError):
    """The input CSV does not match any accepted column contract."""


def _read_rows(path: str) -> tuple[list[str], list[dict]]:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = list(reader.fieldnames or ())
        rows = list(reader)
    if not header:
        raise SchemaError(f"{path} is empty")
    return header, rows


def _typed_aggregate(rows: list[dict], group_by: tuple[str, ...]) -> list[dict]:
    out = []
    for rec in rows:
        row: dict = {}
        for field in group_by:
            value = rec[field]
            row[field] = value if field in ("mode", "structure") else float(value)
        row["n_scenarios"] = int(rec["n_scenarios"])
        row["rounds"] = int(rec["rounds"])
        for field in ("mean_perf", "mean_ci", "final_perf", "final_ci"):
            row[field] = float(rec[field])
        out.append(row)
    return out


def _simulator_command() -> list[str]:
    exe = shutil.which("teamsim")
    if exe:
        return [exe]
    return [sys.executable, "-m", "teamsim"]


def aggregate_via_simulator(summary_path: str, preset: str) -> list[dict]:
    """Collapse a per-scenario summary by running `teamsim report`."""
    tmp = tempfile.NamedTemporaryFile(suffix=".csv", delete=False)
    tmp.close()
    try:
        cmd = _simulator_command() + ["report", "--input", summary_path, "--preset", preset, "--out", tmp.name]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise SchemaError(
                f"`teamsim report` failed (exit {proc.returncode}): {proc.stderr.strip() or proc.stdout.strip()}"
            )
        header, rows = _read_rows(tmp.name)
    finally:
        os.unlink(tmp.name)
    return _typed_aggregate(rows, PRESET_GROUPS[preset])


def load_aggregate(path: str, preset: str) -> list[dict]:
    """Grouped statistics for a preset, from either accepted input shape."""
    if preset not in PRESET_GROUPS:
        raise SchemaError(f"unknown preset {preset!r}; expected one of {sorted(PRESET_GROUPS)}")
    header, rows = _read_rows(path)
    group_by = PRESET_GROUPS[preset]
    if tuple(header) == group_by + STAT_COLUMNS:
        return _typed_aggregate(rows, group_by)
    if set(SUMMARY_COLUMNS) <= set(header):
        return aggregate_via_simulator(path, preset)
    raise SchemaError(
        f"{path} matches neither the summary schema {SUMMARY_COLUMNS} "
        f"nor the {preset} aggregate schema {group_by + STAT_COLUMNS}; got {tuple(header)}"
    )


def aggregate_text(rows: list[dict], preset: str) -> str:
    """Grouped rows rendered back into the aggregate CSV schema."""
    fields = PRESET_GROUPS[preset] + STAT_COLUMNS
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        out = []
        for f in fields:
            v = row[f]
            if f == "tau":
                out.append(format(float(v), "g"))
            elif isinstance(v, float):
                out.append(format(v, ".17g"))
            else:
                out.append(str(v))
        writer.writerow(out)
    return buf.getvalue()


def write_aggregate(path: str, rows: list[dict], preset: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(aggregate_text(rows, preset))
