"""Three-panel learning curves from fig3-preset aggregates."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .schema import MODE_LABELS, MODE_ORDER, PRESET_GROUPS, TAU_LABELS, TAU_ORDER, SchemaError

LINE_STYLES = {
    "fully_autonomous": dict(color="#1f77b4", marker="o"),
    "sequential": dict(color="#ff7f0e", marker="s"),
    "liaison": dict(color="#2ca02c", marker="^"),
    "lateral": dict(color="#d62728", marker="d"),
}


@dataclass(frozen=True)
class FigureSpec:
    """One rendering request: where to read, what to draw, where to write."""

    input: str
    preset: str
    out: str
    format: str

    def validate(self) -> None:
        if self.preset not in PRESET_GROUPS:
            raise SchemaError(f"unknown preset {self.preset!r}; expected one of {sorted(PRESET_GROUPS)}")
        image = self.preset == "fig3"
        allowed = ("png", "svg") if image else ("md", "csv")
        if self.format not in allowed:
            kind = "an image" if image else "a table"
            raise SchemaError(f"preset {self.preset} renders {kind}; format must be one of {allowed}")


def render_fig3(rows: list[dict], out_path: str | None = None, dpi: int = 150):
    """Mean performance against learning probability, one panel per tenure.

    Each panel draws one line per coordination mode across every
    probability present in the aggregate. Cells absent from the input are
    left as gaps and reported in a single warning. Returns the figure;
    writes it when out_path is given.
    """
    by_key = {(r["mode"], r["tau"], r["prob"]): r for r in rows}
    probs = sorted({r["prob"] for r in rows})
    if not probs:
        raise SchemaError("aggregate holds no rows to draw")

    missing = []
    fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.8), sharey=True)
    for ax, tau in zip(axes, TAU_ORDER):
        for mode in MODE_ORDER:
            ys = []
            for p in probs:
                row = by_key.get((mode, tau, p))
                if row is None:
                    missing.append((mode, tau, p))
                    ys.append(float("nan"))
                else:
                    ys.append(row["mean_perf"])
            ax.plot(probs, ys, label=MODE_LABELS[mode], linewidth=1.4, markersize=4, **LINE_STYLES[mode])
        ax.set_title(TAU_LABELS[tau])
        ax.set_xlabel("learning probability")
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("mean performance")
    axes[0].legend(loc="lower right", fontsize=8)
    fig.tight_layout()

    if missing:
        cells = ", ".join(f"({m}, tau={t:g}, prob={p:g})" for m, t, p in missing)
        warnings.warn(f"aggregate lacks {len(missing)} cells, drawn as gaps: {cells}", stacklevel=2)
    if out_path is not None:
        fig.savefig(out_path, dpi=dpi)
    return fig
