"""Command-line interface: grid runs, preset reports, oracle checks.

`teamsim run` simulates a scenario grid and writes summary.csv,
periods.csv, optionally rounds.csv, and a manifest.json that records
every parameter shaping the run; `teamsim run --from-manifest` replays a
manifest and reproduces the CSVs byte for byte. `teamsim report`
aggregates a summary.csv with one of the named presets. `teamsim oracle`
runs the built-in cross-checks.
"""

from __future__ import annotations

import argparse
import ast
import dataclasses
import json
import math
import os
import sys
import time
from datetime import datetime, timezone

from . import __version__
from .engine import GRID_KS, GRID_PROBS, GRID_TAUS, ScenarioConfig, effective_workers, enumerate_scenarios, run_grid
from .coordination import MODES
from .errors import ConfigError
from .landscape import STRUCTURES
from .metrics import (
    DEFAULT_ALPHA,
    PRESETS,
    aggregate,
    read_summary_csv,
    summarize,
    write_aggregate_csv,
    write_periods_csv,
    write_rounds_csv,
    write_summary_csv,
)
from .oracles import ORACLES, run_oracles

# Named axis grids selectable with --grid; "default" is the full
# published grid that enumerate_scenarios() yields with no arguments.
GRIDS = {
    "default": {
        "modes": list(MODES),
        "ks": list(GRID_KS),
        "structures": list(STRUCTURES),
        "taus": list(GRID_TAUS),
        "probs": list(GRID_PROBS),
    },
}

# Scalar defaults mirror ScenarioConfig so the CLI and the library can
# never disagree about what an unqualified run means.
_CFG_DEFAULTS = {f.name: f.default for f in dataclasses.fields(ScenarioConfig)}

_RUN_DEFAULTS = {
    **GRIDS["default"],
    "rounds": _CFG_DEFAULTS["rounds"],
    "periods": _CFG_DEFAULTS["periods"],
    "master_seed": _CFG_DEFAULTS["master_seed"],
    "error_sd": _CFG_DEFAULTS["error_sd"],
    "alpha": DEFAULT_ALPHA,
    "write_rounds": False,
}

# Singular spellings select one value for an axis; the plural flags take
# lists. The two forms are mutually exclusive per axis.
_AXIS_SINGULAR = {"modes": "mode", "ks": "k", "structures": "structure", "taus": "tau", "probs": "prob"}


def _parse_tau(text) -> float:
    value = float(text)
    return value


def parse_config_file(path: str) -> dict:
    """Flat `key = value` lines with dotted keys; values in Python literal
    syntax (bare words fall back to strings), # starts a comment line."""
    settings: dict[str, object] = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        lowered = raw.lower()
        if lowered in ("true", "false"):
            value: object = lowered == "true"
        elif lowered == "inf":
            value = math.inf
        else:
            try:
                value = ast.literal_eval(raw)
            except (ValueError, SyntaxError):
                value = raw
        settings[key] = value
    return settings


def _settings_to_params(settings: dict) -> dict:
    """Map dotted config keys onto run parameters."""
    params: dict[str, object] = {}
    known = {
        "grid.modes": "modes",
        "grid.ks": "ks",
        "grid.structures": "structures",
        "grid.taus": "taus",
        "grid.probs": "probs",
        "run.rounds": "rounds",
        "run.periods": "periods",
        "run.master_seed": "master_seed",
        "run.error_sd": "error_sd",
        "run.alpha": "alpha",
        "run.write_rounds": "write_rounds",
    }
    for key, value in settings.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}; expected one of {sorted(known)}")
        name = known[key]
        if name in ("modes", "structures"):
            value = [str(v) for v in _as_list(value)]
        elif name == "ks":
            value = [int(v) for v in _as_list(value)]
        elif name == "taus":
            value = [_parse_tau(v) for v in _as_list(value)]
        elif name == "probs":
            value = [float(v) for v in _as_list(value)]
        params[name] = value
    return params


def _as_list(value) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _load_manifest(path: str) -> dict:
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    if manifest.get("format") != "teamsim-run/1":
        raise ConfigError(f"{path} is not a teamsim run manifest")
    params = dict(manifest.get("params", {}))
    grid = manifest.get("grid", {})
    params["modes"] = [str(v) for v in grid.get("modes", [])]
    params["ks"] = [int(v) for v in grid.get("ks", [])]
    params["structures"] = [str(v) for v in grid.get("structures", [])]
    params["taus"] = [float(v) for v in grid.get("taus", [])]
    params["probs"] = [float(v) for v in grid.get("probs", [])]
    return params


def _write_manifest(path: str, params: dict) -> None:
    manifest = {
        "format": "teamsim-run/1",
        "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "teamsim_version": __version__,
        "params": {
            "rounds": params["rounds"],
            "periods": params["periods"],
            "master_seed": params["master_seed"],
            "error_sd": params["error_sd"],
            "alpha": params["alpha"],
            "write_rounds": params["write_rounds"],
        },
        "grid": {
            "modes": params["modes"],
            "ks": params["ks"],
            "structures": params["structures"],
            "taus": [format(float(t), "g") for t in params["taus"]],
            "probs": [float(p) for p in params["probs"]],
        },
        "outputs": {"summary": "summary.csv", "periods": "periods.csv"}
        | ({"rounds": "rounds.csv"} if params["write_rounds"] else {}),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_run(args: argparse.Namespace) -> int:
    params = dict(_RUN_DEFAULTS)
    if args.config and args.from_manifest:
        raise ConfigError("--config and --from-manifest are mutually exclusive")
    if args.config:
        params.update(_settings_to_params(parse_config_file(args.config)))
    if args.from_manifest:
        params.update(_load_manifest(args.from_manifest))

    if args.paper_scale and args.rounds is not None:
        raise ConfigError("--paper-scale and --rounds are mutually exclusive")
    if args.paper_scale:
        params["rounds"] = 1500
    if args.grid is not None:
        params.update(GRIDS[args.grid])
    for name in ("rounds", "periods", "master_seed", "error_sd", "alpha"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    for name, singular in _AXIS_SINGULAR.items():
        plural_value = getattr(args, name)
        singular_value = getattr(args, singular)
        if plural_value is not None and singular_value is not None:
            raise ConfigError(f"--{singular} and --{name} are mutually exclusive")
        if singular_value is not None:
            params[name] = [singular_value]
        elif plural_value is not None:
            params[name] = plural_value
    if args.write_rounds:
        params["write_rounds"] = True

    configs = enumerate_scenarios(
        modes=params["modes"],
        ks=params["ks"],
        structures=params["structures"],
        taus=params["taus"],
        probs=params["probs"],
        rounds=int(params["rounds"]),
        periods=int(params["periods"]),
        error_sd=float(params["error_sd"]),
        master_seed=int(params["master_seed"]),
    )
    if not configs:
        raise ConfigError("the requested grid is empty")
    alpha = float(params["alpha"])
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")

    out_dir = args.out or os.environ.get("TEAMSIM_OUT") or "out"
    os.makedirs(out_dir, exist_ok=True)
    workers = effective_workers(args.workers)

    total_rounds = sum(c.rounds for c in configs)
    print(
        f"running {len(configs)} scenarios x {configs[0].rounds} rounds "
        f"({total_rounds} rounds total, {workers} worker{'s' if workers != 1 else ''})",
        file=sys.stderr,
    )
    start = time.monotonic()
    last_shown = [0.0]

    def progress(done: int, total: int) -> None:
        now = time.monotonic()
        if done == total or now - last_shown[0] >= 10.0:
            last_shown[0] = now
            pct = 100.0 * done / total
            print(f"  {done}/{total} chunks ({pct:.1f}%), {now - start:.0f}s elapsed", file=sys.stderr, flush=True)

    results = run_grid(configs, workers=workers, progress=progress)
    summaries = [summarize(r, alpha) for r in results]

    # Stage everything, then rename, so failures leave no partial outputs.
    staged: list[tuple[str, str]] = []

    def stage(name: str) -> str:
        tmp = os.path.join(out_dir, name + ".tmp")
        staged.append((tmp, os.path.join(out_dir, name)))
        return tmp

    try:
        write_summary_csv(stage("summary.csv"), summaries)
        write_periods_csv(stage("periods.csv"), results)
        if params["write_rounds"]:
            write_rounds_csv(stage("rounds.csv"), results)
        _write_manifest(stage("manifest.json"), params)
        for tmp, final in staged:
            os.replace(tmp, final)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise

    elapsed = time.monotonic() - start
    print(f"wrote {out_dir}/summary.csv ({len(summaries)} scenarios) in {elapsed:.1f}s")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    if args.preset not in PRESETS:
        raise ConfigError(f"unknown preset {args.preset!r}; expected one of {sorted(PRESETS)}")
    preset = PRESETS[args.preset]
    summaries = read_summary_csv(args.input)
    if not summaries:
        raise ConfigError(f"{args.input} contains no scenarios")
    rows = aggregate(summaries, preset.group_by, preset.filters, alpha=args.alpha)
    out = args.out or f"{args.preset}.csv"
    tmp = out + ".tmp"
    try:
        write_aggregate_csv(tmp, rows, preset.group_by)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    print(f"wrote {out} ({len(rows)} groups)")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.list:
        for name in ORACLES:
            print(name)
        return 0
    names = args.names or None
    if names:
        unknown = [n for n in names if n not in ORACLES]
        if unknown:
            raise ConfigError(f"unknown oracle(s) {unknown}; available: {', '.join(sorted(ORACLES))}")
    reports = run_oracles(names, seed=args.seed)
    failed = 0
    for rep in reports:
        tag = "PASS" if rep.ok else "FAIL"
        print(f"[{tag}] {rep.name}: {rep.detail}")
        failed += 0 if rep.ok else 1
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teamsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"teamsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate a scenario grid and write CSV outputs")
    run_p.add_argument("--out", default=None, help="output directory (default: $TEAMSIM_OUT or ./out)")
    run_p.add_argument("--config", help="flat key = value config file")
    run_p.add_argument("--from-manifest", help="replay a previous run's manifest.json")
    run_p.add_argument("--grid", choices=sorted(GRIDS), default=None, help="named axis grid")
    run_p.add_argument("--modes", nargs="+", choices=MODES, default=None)
    run_p.add_argument("--ks", nargs="+", type=int, default=None)
    run_p.add_argument("--structures", nargs="+", choices=STRUCTURES, default=None)
    run_p.add_argument("--taus", nargs="+", type=_parse_tau, default=None, help="periods between reformations; inf allowed")
    run_p.add_argument("--probs", nargs="+", type=float, default=None)
    run_p.add_argument("--mode", choices=MODES, default=None, help="single-scenario form of --modes")
    run_p.add_argument("--k", type=int, default=None, help="single-scenario form of --ks")
    run_p.add_argument("--structure", choices=STRUCTURES, default=None, help="single-scenario form of --structures")
    run_p.add_argument("--tau", type=_parse_tau, default=None, help="single-scenario form of --taus")
    run_p.add_argument("--prob", type=float, default=None, help="single-scenario form of --probs")
    run_p.add_argument("--rounds", type=int, default=None)
    run_p.add_argument("--periods", type=int, default=None)
    run_p.add_argument("--seed", "--master-seed", dest="master_seed", type=int, default=None)
    run_p.add_argument("--error-sd", dest="error_sd", type=float, default=None)
    run_p.add_argument("--alpha", type=float, default=None, help="CI significance level")
    run_p.add_argument("--workers", type=int, default=None, help="process count (default: all cores)")
    run_p.add_argument("--write-rounds", action="store_true", help="also write per-round rounds.csv")
    run_p.add_argument("--paper-scale", action="store_true", help="use 1500 rounds per scenario")
    run_p.set_defaults(func=cmd_run)

    rep_p = sub.add_parser("report", help="aggregate a summary.csv with a named preset")
    rep_p.add_argument("--input", required=True, help="summary.csv from a run")
    rep_p.add_argument("--preset", required=True, help=f"one of {', '.join(sorted(PRESETS))}")
    rep_p.add_argument("--out", default=None, help="output CSV path (default: <preset>.csv)")
    rep_p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    rep_p.set_defaults(func=cmd_report)

    orc_p = sub.add_parser("oracle", help="run built-in cross-checks")
    orc_p.add_argument("names", nargs="*", help="oracle names (default: all)")
    orc_p.add_argument("--list", action="store_true", help="list oracle names")
    orc_p.add_argument("--seed", type=int, default=0)
    orc_p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
