"""teamreport: render figures and tables from simulator CSV outputs.

`teamreport --input summary.csv --preset fig3 --out fig3.png` draws the
three-panel learning curves; table presets emit markdown or CSV. The
input may be a per-scenario summary (aggregated by calling the simulator)
or an already-aggregated CSV for the same preset.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .figures import FigureSpec, render_fig3
from .schema import PRESET_GROUPS, SchemaError, load_aggregate
from .tables import render_tables

DEFAULT_FORMAT = {"fig3": "png", "table2": "md", "table3": "md", "table4": "md"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teamreport", description=__doc__)
    parser.add_argument("--version", action="version", version=f"teamreport {__version__}")
    parser.add_argument("--input", required=True, help="summary.csv or a matching aggregate CSV")
    parser.add_argument("--preset", required=True, choices=sorted(PRESET_GROUPS))
    parser.add_argument("--out", default=None, help="output path (default: <preset>.<format>)")
    parser.add_argument("--format", default=None, choices=("png", "svg", "md", "csv"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or DEFAULT_FORMAT[args.preset]
    out = args.out or f"{args.preset}.{fmt}"
    spec = FigureSpec(input=args.input, preset=args.preset, out=out, format=fmt)
    try:
        spec.validate()
        rows = load_aggregate(spec.input, spec.preset)
        if spec.preset == "fig3":
            render_fig3(rows, spec.out)
        else:
            render_tables(rows, spec.preset, spec.out, fmt=spec.format)
    except SchemaError as exc:
        print(f"teamreport: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {spec.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
