"""Summary statistics, grouped aggregation, and the CSV interchange format.

A scenario's samples are its per-round trajectory means (and per-round
final-period values); confidence intervals are normal-approximation
intervals over those samples. Grouped aggregates report the unweighted
mean of scenario means but pool the underlying per-round samples for the
interval, reconstructing pooled variance from per-scenario moments via
the sum-of-squares identity, so aggregating from a summary CSV gives the
same interval as aggregating in memory.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass

import numpy as np

from .coordination import MODES
from .engine import GRID_TAUS, ScenarioResult
from .errors import ConfigError
from .landscape import STRUCTURES

DEFAULT_ALPHA = 1e-4

SUMMARY_FIELDS = (
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

PERIOD_FIELDS = ("scenario_id", "period", "mean_norm_perf")
ROUND_FIELDS = ("scenario_id", "round", "mean_perf", "final_perf")


def z_value(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    return statistics.NormalDist().inv_cdf(1 - alpha / 2)


def confidence_halfwidth(samples, alpha: float = DEFAULT_ALPHA) -> float:
    """Half-width of the normal-approximation CI for the sample mean."""
    n = len(samples)
    if n < 2:
        return 0.0
    sd = float(np.std(samples, ddof=1))
    return z_value(alpha) * sd / math.sqrt(n)


@dataclass
class ScenarioSummary:
    """One scenario's aggregate statistics, optionally with raw samples."""

    scenario_id: str
    mode: str
    k: int
    structure: str
    tau: float
    prob: float
    rounds: int
    mean_perf: float
    mean_ci: float
    final_perf: float
    final_ci: float
    round_means: np.ndarray | None = None
    round_finals: np.ndarray | None = None


def summarize(result: ScenarioResult, alpha: float = DEFAULT_ALPHA) -> ScenarioSummary:
    config = result.config
    return ScenarioSummary(
        scenario_id=config.scenario_id(),
        mode=config.mode,
        k=config.k,
        structure=config.structure,
        tau=float(config.tau),
        prob=float(config.prob),
        rounds=config.rounds,
        mean_perf=float(np.mean(result.round_means)),
        mean_ci=confidence_halfwidth(result.round_means, alpha),
        final_perf=float(np.mean(result.round_finals)),
        final_ci=confidence_halfwidth(result.round_finals, alpha),
        round_means=result.round_means,
        round_finals=result.round_finals,
    )


@dataclass(frozen=True)
class Preset:
    """A named grouping of the grid for reporting."""

    group_by: tuple[str, ...]
    filters: tuple[tuple[str, object], ...] = ()


PRESETS = {
    "table2": Preset(group_by=("mode", "tau")),
    "table3": Preset(group_by=("tau", "mode", "structure"), filters=(("k", 3),)),
    "table4": Preset(group_by=("tau", "mode", "structure"), filters=(("k", 5),)),
    "fig3": Preset(group_by=("mode", "tau", "prob")),
}


def _axis_rank(field: str, value) -> float:
    if field == "mode":
        return MODES.index(value)
    if field == "structure":
        return STRUCTURES.index(value)
    if field == "tau":
        # Canonical reporting order: no reformation first, then shorter cadences.
        return -float(value) if math.isfinite(float(value)) else -math.inf
    return float(value)


def _moments(summary: ScenarioSummary, which: str, alpha: float) -> tuple[int, float, float]:
    """(n, mean, sd) of a summary's sample set, from samples when present,
    otherwise inverted from the stored interval half-width."""
    samples = summary.round_means if which == "mean" else summary.round_finals
    mean = summary.mean_perf if which == "mean" else summary.final_perf
    ci = summary.mean_ci if which == "mean" else summary.final_ci
    n = summary.rounds
    if samples is not None:
        return n, float(np.mean(samples)), float(np.std(samples, ddof=1)) if n > 1 else 0.0
    sd = ci * math.sqrt(n) / z_value(alpha) if n > 1 else 0.0
    return n, mean, sd


def _pooled_halfwidth(moments: list[tuple[int, float, float]], alpha: float) -> float:
    total = sum(n for n, _, _ in moments)
    if total < 2:
        return 0.0
    grand = sum(n * m for n, m, _ in moments) / total
    ss = sum((n - 1) * sd * sd + n * (m - grand) ** 2 for n, m, sd in moments)
    return z_value(alpha) * math.sqrt(ss / (total - 1)) / math.sqrt(total)


def aggregate(
    summaries: list[ScenarioSummary],
    group_by: tuple[str, ...],
    filters: tuple[tuple[str, object], ...] = (),
    alpha: float = DEFAULT_ALPHA,
) -> list[dict]:
    """Collapse scenarios into groups over the remaining axes.

    Returns one row per group: the group key fields, the number of
    scenarios and pooled rounds, the unweighted mean of scenario means,
    and pooled-sample interval half-widths.
    """
    valid = set(SUMMARY_FIELDS[1:6])
    for field in group_by:
        if field not in valid:
            raise ConfigError(f"cannot group by {field!r}; expected fields from {sorted(valid)}")

    selected = []
    for s in summaries:
        if all(_matches(getattr(s, f), v) for f, v in filters):
            selected.append(s)

    groups: dict[tuple, list[ScenarioSummary]] = {}
    for s in selected:
        key = tuple(getattr(s, f) for f in group_by)
        groups.setdefault(key, []).append(s)

    rows = []
    for key in sorted(groups, key=lambda k: tuple(_axis_rank(f, v) for f, v in zip(group_by, k))):
        members = groups[key]
        mean_moms = [_moments(s, "mean", alpha) for s in members]
        final_moms = [_moments(s, "final", alpha) for s in members]
        row = dict(zip(group_by, key))
        row["n_scenarios"] = len(members)
        row["rounds"] = sum(s.rounds for s in members)
        row["mean_perf"] = sum(s.mean_perf for s in members) / len(members)
        row["mean_ci"] = _pooled_halfwidth(mean_moms, alpha)
        row["final_perf"] = sum(s.final_perf for s in members) / len(members)
        row["final_ci"] = _pooled_halfwidth(final_moms, alpha)
        rows.append(row)
    return rows


def _matches(actual, wanted) -> bool:
    if isinstance(wanted, float) or isinstance(actual, float):
        return float(actual) == float(wanted)
    return actual == wanted


def _fmt_tau(tau: float) -> str:
    return format(float(tau), "g")


def write_summary_csv(path: str, summaries: list[ScenarioSummary]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_FIELDS)
        for s in summaries:
            writer.writerow(
                (
                    s.scenario_id,
                    s.mode,
                    s.k,
                    s.structure,
                    _fmt_tau(s.tau),
                    format(float(s.prob), ".17g"),
                    s.rounds,
                    format(s.mean_perf, ".17g"),
                    format(s.mean_ci, ".17g"),
                    format(s.final_perf, ".17g"),
                    format(s.final_ci, ".17g"),
                )
            )


def read_summary_csv(path: str) -> list[ScenarioSummary]:
    """Load a summary written by write_summary_csv; samples stay absent, so
    later aggregation reconstructs pooled variance from the moments."""
    out = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read summary csv {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        missing = set(SUMMARY_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"summary csv is missing columns: {sorted(missing)}")
        for rec in reader:
            out.append(
                ScenarioSummary(
                    scenario_id=rec["scenario_id"],
                    mode=rec["mode"],
                    k=int(rec["k"]),
                    structure=rec["structure"],
                    tau=float(rec["tau"]),
                    prob=float(rec["prob"]),
                    rounds=int(rec["rounds"]),
                    mean_perf=float(rec["mean_perf"]),
                    mean_ci=float(rec["mean_ci"]),
                    final_perf=float(rec["final_perf"]),
                    final_ci=float(rec["final_ci"]),
                )
            )
    return out


def write_periods_csv(path: str, results: list[ScenarioResult]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PERIOD_FIELDS)
        for res in results:
            sid = res.config.scenario_id()
            for t, value in enumerate(res.period_means, start=1):
                writer.writerow((sid, t, format(float(value), ".17g")))


def write_rounds_csv(path: str, results: list[ScenarioResult]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROUND_FIELDS)
        for res in results:
            sid = res.config.scenario_id()
            for r in range(res.round_means.size):
                writer.writerow(
                    (sid, r, format(float(res.round_means[r]), ".17g"), format(float(res.round_finals[r]), ".17g"))
                )


def write_aggregate_csv(path: str, rows: list[dict], group_by: tuple[str, ...]) -> None:
    fields = tuple(group_by) + ("n_scenarios", "rounds", "mean_perf", "mean_ci", "final_perf", "final_ci")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            out = []
            for f in fields:
                v = row[f]
                if f == "tau":
                    out.append(_fmt_tau(v))
                elif isinstance(v, float):
                    out.append(format(v, ".17g"))
                else:
                    out.append(str(v))
            writer.writerow(out)
