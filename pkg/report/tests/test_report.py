"""Rendering contracts for the report package, ending in the A10 gate."""

import csv
import math
import re

import pytest

from teamreport.figures import FigureSpec, render_fig3
from teamreport.schema import (
    MODE_ORDER,
    PRESET_GROUPS,
    STAT_COLUMNS,
    STRUCTURE_ORDER,
    SUMMARY_COLUMNS,
    SchemaError,
    load_aggregate,
    write_aggregate,
)
from teamreport.tables import iter_table_numbers, render_tables

MODES = MODE_ORDER
TAUS = (math.inf, 10.0, 1.0)
PROBS = tuple(i / 10 for i in range(11))
KS = (3, 5)


def synthetic_value(mode, k, structure, tau, prob):
    """Deterministic, unique-by-cell performance in (0, 1)."""
    base = {"fully_autonomous": 0.72, "sequential": 0.76, "liaison": 0.68, "lateral": 0.80}[mode]
    return (
        base
        + 0.012 * prob
        + 0.004 * (1.0 / tau if math.isfinite(tau) else 0.0)
        + 0.0021 * STRUCTURE_ORDER.index(structure)
        + 0.0013 * (k == 5)
    )


def write_summary(path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for mode in MODES:
            for k in KS:
                for structure in STRUCTURE_ORDER:
                    for tau in TAUS:
                        for prob in PROBS:
                            mean = synthetic_value(mode, k, structure, tau, prob)
                            sid = f"{mode}-k{k}-{structure}-tau{tau:g}-p{prob:g}"
                            writer.writerow(
                                (
                                    sid,
                                    mode,
                                    k,
                                    structure,
                                    format(tau, "g"),
                                    prob,
                                    300,
                                    format(mean, ".17g"),
                                    "0.002",
                                    format(mean + 0.05, ".17g"),
                                    "0.003",
                                )
                            )


@pytest.fixture(scope="session")
def summary_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("grid") / "summary.csv"
    write_summary(path)
    return str(path)


def write_fig3_aggregate(path, value=0.8):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PRESET_GROUPS["fig3"] + STAT_COLUMNS)
        for mode in MODES:
            for tau in TAUS:
                for prob in PROBS:
                    writer.writerow((mode, format(tau, "g"), prob, 12, 3600, value, 0.001, value, 0.001))


# --- schema handling ---


def test_summary_is_aggregated_through_the_simulator(summary_csv):
    rows = load_aggregate(summary_csv, "fig3")
    assert len(rows) == len(MODES) * len(TAUS) * len(PROBS)
    by_key = {(r["mode"], r["tau"], r["prob"]): r for r in rows}
    # unweighted mean over k and structure reproduces the synthetic formula
    want = sum(
        synthetic_value("lateral", k, s, 1.0, 0.5) for k in KS for s in STRUCTURE_ORDER
    ) / (len(KS) * len(STRUCTURE_ORDER))
    assert by_key[("lateral", 1.0, 0.5)]["mean_perf"] == pytest.approx(want, abs=1e-12)


def test_aggregate_input_is_used_directly(tmp_path):
    path = tmp_path / "agg.csv"
    write_fig3_aggregate(path)
    rows = load_aggregate(str(path), "fig3")
    assert len(rows) == len(MODES) * len(TAUS) * len(PROBS)
    assert all(r["mean_perf"] == 0.8 for r in rows)


def test_schema_mismatch_names_columns(tmp_path):
    path = tmp_path / "bad.csv"
    with open(path, "w") as fh:
        fh.write("alpha,beta\n1,2\n")
    with pytest.raises(SchemaError) as err:
        load_aggregate(str(path), "table2")
    message = str(err.value)
    assert "alpha" in message and "mean_perf" in message


def test_unknown_preset_rejected(tmp_path):
    path = tmp_path / "agg.csv"
    write_fig3_aggregate(path)
    with pytest.raises(SchemaError):
        load_aggregate(str(path), "fig9")


def test_figure_spec_validation():
    FigureSpec("in.csv", "fig3", "out.png", "png").validate()
    with pytest.raises(SchemaError):
        FigureSpec("in.csv", "fig3", "out.md", "md").validate()
    with pytest.raises(SchemaError):
        FigureSpec("in.csv", "table2", "out.png", "png").validate()


# --- figures ---


def test_fig3_flat_fixture_draws_flat_lines(tmp_path):
    path = tmp_path / "agg.csv"
    write_fig3_aggregate(path, value=0.8)
    fig = render_fig3(load_aggregate(str(path), "fig3"))
    assert len(fig.axes) == 3
    for ax in fig.axes:
        assert len(ax.lines) == 4
        for line in ax.lines:
            ys = line.get_ydata()
            assert len(ys) == 11
            assert all(y == 0.8 for y in ys)


def test_fig3_missing_cells_warn_and_gap(tmp_path):
    path = tmp_path / "agg.csv"
    write_fig3_aggregate(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    kept = [ln for ln in lines if not ln.startswith("liaison,10,0.5")]
    assert len(kept) == len(lines) - 1
    with open(path, "w") as fh:
        fh.write("\n".join(kept) + "\n")
    with pytest.warns(UserWarning, match=r"liaison, tau=10, prob=0\.5"):
        fig = render_fig3(load_aggregate(str(path), "fig3"))
    panel = fig.axes[1]
    line = panel.lines[MODES.index("liaison")]
    ys = line.get_ydata()
    assert math.isnan(ys[5]) and not math.isnan(ys[4])


def test_fig3_writes_both_image_formats(tmp_path):
    path = tmp_path / "agg.csv"
    write_fig3_aggregate(path)
    rows = load_aggregate(str(path), "fig3")
    for ext in ("png", "svg"):
        out = tmp_path / f"fig.{ext}"
        render_fig3(rows, str(out))
        assert out.stat().st_size > 0


# --- tables ---


def bold_cells(md):
    return re.findall(r"\*\*(\d+\.\d{4})\*\*", md)


def test_table2_layout_and_emphasis(summary_csv):
    rows = load_aggregate(summary_csv, "table2")
    md = render_tables(rows, "table2")
    lines = md.strip().splitlines()
    header = [c.strip() for c in lines[0].strip("|").split("|")]
    assert header[0] == "mode"
    assert len(header) == 7  # three tenures for each of mean and final
    value_rows = [ln for ln in lines[2:] if "(+-" not in ln]
    ci_rows = [ln for ln in lines[2:] if "(+-" in ln]
    assert len(value_rows) == 4 and len(ci_rows) == 4
    # one bold maximum per value column
    assert len(bold_cells(md)) == 6
    # the synthetic data makes lateral the winner everywhere
    lateral_row = next(ln for ln in value_rows if ln.startswith("| lateral"))
    assert lateral_row.count("**") == 2 * 6


def test_table2_round_trip_matches_source(summary_csv):
    rows = load_aggregate(summary_csv, "table2")
    md = render_tables(rows, "table2")
    by_key = {(r["mode"], r["tau"]): r for r in rows}
    # value cells appear per mode as the mean block then the final block
    want = []
    for mode in MODES:
        for which in ("mean_perf", "final_perf"):
            for tau in TAUS:
                want.append(float(f"{by_key[(mode, tau)][which]:.4f}"))
    got = list(iter_table_numbers(md))
    assert got == want


def test_table3_blocks_and_columns(summary_csv):
    rows = load_aggregate(summary_csv, "table3")
    md = render_tables(rows, "table3")
    blocks = [b for b in md.split("### ") if b.strip()]
    assert len(blocks) == 3
    for block in blocks:
        lines = block.strip().splitlines()
        header = [c.strip() for c in lines[2].strip("|").split("|")]
        assert header == ["mode"] + list(STRUCTURE_ORDER)
        assert len(bold_cells(block)) == 6


def test_table_csv_format_round_trips(tmp_path, summary_csv):
    rows = load_aggregate(summary_csv, "table2")
    out = tmp_path / "t2.csv"
    render_tables(rows, "table2", str(out), fmt="csv")
    again = load_aggregate(str(out), "table2")
    assert again == rows


def test_missing_table_cell_is_an_error(tmp_path, summary_csv):
    rows = [r for r in load_aggregate(summary_csv, "table2") if r["mode"] != "liaison"]
    with pytest.raises(SchemaError, match="liaison"):
        render_tables(rows, "table2")


def test_aggregate_write_read_identity(tmp_path, summary_csv):
    rows = load_aggregate(summary_csv, "fig3")
    path = tmp_path / "roundtrip.csv"
    write_aggregate(str(path), rows, "fig3")
    assert load_aggregate(str(path), "fig3") == rows


# --- the acceptance gate ---


def test_a10_report_package(capsys, summary_csv, tmp_path):
    problems = []

    fig = render_fig3(load_aggregate(summary_csv, "fig3"), str(tmp_path / "fig3.png"))
    panels = len(fig.axes)
    lines = {len(ax.lines) for ax in fig.axes}
    points = {len(line.get_ydata()) for ax in fig.axes for line in ax.lines}
    if not (panels == 3 and lines == {4} and points == {11}):
        problems.append(f"fig3 shape {panels} panels, lines {lines}, points {points}")

    rows = load_aggregate(summary_csv, "table2")
    md = render_tables(rows, "table2")
    value_rows = [ln for ln in md.strip().splitlines()[2:] if "(+-" not in ln]
    n_bold = len(bold_cells(md))
    if not (len(value_rows) == 4 and n_bold == 6):
        problems.append(f"table2 layout {len(value_rows)} mode rows, {n_bold} emphasized cells")

    by_key = {(r["mode"], r["tau"]): r for r in rows}
    want = [
        float(f"{by_key[(mode, tau)][which]:.4f}")
        for mode in MODES
        for which in ("mean_perf", "final_perf")
        for tau in TAUS
    ]
    if list(iter_table_numbers(md)) != want:
        problems.append("table2 values diverge from their CSV source")

    detail = "; ".join(problems) if problems else (
        "fig3 = 3 panels x 4 lines x 11 points; table2 = 4 mode rows, one emphasized "
        "maximum in each of 6 columns; rendered values match the CSV source"
    )
    with capsys.disabled():
        print(f"[{'PASS' if not problems else 'FAIL'}] A10: {detail}", flush=True)
    assert not problems, detail
