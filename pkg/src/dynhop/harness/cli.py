"""Command-line entry points.

Subcommands: ``synth`` emits a synthetic dataset, ``build-graph`` derives a
static graph from a series, ``run`` executes a configured experiment,
``report`` merges written reports into a summary JSON.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 every single
run of every algorithm diverged.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from ..edge_dynamics import NodeSignalSeries
from ..graphs import graph_to_csv
from .config import ConfigError, deep_merge, load_config, resolve_config
from .data import DataError, GraphBuildSpec, build_initial_graph, ingest_csv, series_to_csv
from .experiment import brain_preset, run_experiment, stock_preset, write_reports
from .synthetic import SyntheticSpec, make_synthetic_dataset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_ALL_DIVERGED = 4

PRESETS = {"brain": brain_preset, "stock": stock_preset}


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        nodes=args.nodes,
        edges=args.edges,
        steps=args.steps,
        regimes=args.regimes,
        switch_times=tuple(args.switch_times) if args.switch_times else None,
        bandlimit=args.bandlimit,
        seed=args.seed,
    )
    graph, series = make_synthetic_dataset(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    series_to_csv(series, out / "series.csv")
    graph_to_csv(graph, out / "graph.csv")
    print(f"wrote {out / 'series.csv'} and {out / 'graph.csv'}")
    return EXIT_OK


def _cmd_build_graph(args: argparse.Namespace) -> int:
    series = ingest_csv(args.series_csv)
    if args.train_end is not None:
        if not 2 <= args.train_end <= series.steps:
            raise ConfigError(f"--train-end must lie in 2..{series.steps}")
        series = NodeSignalSeries(series.values[: args.train_end], labels=series.labels)
    spec = GraphBuildSpec(top_k=args.top_k, abs_corr_threshold=args.threshold)
    graph = build_initial_graph(series, spec)
    graph_to_csv(graph, args.out)
    print(f"wrote {args.out} ({graph.node_count} nodes, {graph.edge_count} edges)")
    return EXIT_OK


def _apply_overrides(raw: dict, args: argparse.Namespace) -> dict:
    noise = dict(raw.get("noise") or {})
    for flag, key in [("seed", "seed"), ("snr", "snr"), ("missing_frac", "missing_fraction"),
                      ("runs", "runs")]:
        value = getattr(args, flag)
        if value is not None:
            noise[key] = value
    if args.snr_db:
        noise["snr_in_db"] = True
    raw = dict(raw)
    raw["noise"] = noise

    if args.algo:
        raw["algorithms"] = [{"algorithm": name} for name in args.algo]
    algorithms = [dict(a) for a in raw.get("algorithms") or []]
    for entry in algorithms:
        if args.hops is not None:
            entry["hops"] = args.hops
        if args.tau is not None:
            prune = dict(entry.get("prune") or {})
            prune["threshold"] = args.tau
            entry["prune"] = prune
        if args.window is not None or args.stride is not None:
            window = dict(entry.get("window") or {})
            if args.window is not None:
                window["window"] = args.window
            if args.stride is not None:
                window["stride"] = args.stride
            window.setdefault("window", 10)
            entry["window"] = window
        step = dict(entry.get("step") or {})
        kind = step.get("kind", "fixed")
        if kind == "fixed" and args.mu is not None:
            step = {"kind": "fixed", "mu": args.mu}
        if kind == "residual-adaptive" and (args.mu_min is not None or args.mu_max is not None):
            if args.mu_min is not None:
                step["mu_min"] = args.mu_min
            if args.mu_max is not None:
                step["mu_max"] = args.mu_max
        if step:
            entry["step"] = step
    raw["algorithms"] = algorithms

    if args.out_dir is not None:
        raw["out_dir"] = args.out_dir
    return raw


def _cmd_run(args: argparse.Namespace) -> int:
    raw: dict = {}
    if args.preset:
        raw = PRESETS[args.preset]()
    if args.config:
        raw = deep_merge(raw, load_config(args.config))
    if not raw:
        raise ConfigError("run needs --config and/or --preset")
    raw = _apply_overrides(raw, args)
    resolved = resolve_config(raw)
    if resolved.out_dir is None:
        raise ConfigError("no output directory: pass --out-dir or set out_dir in the config")

    report = run_experiment(
        resolved.dataset, resolved.noise, resolved.algorithms, resolved.graph_build
    )
    # out_dir is where the reports land, not part of the experiment: keeping
    # it out of the manifest makes identical runs byte-identical anywhere
    captured = {k: v for k, v in resolved.raw.items() if k != "out_dir"}
    written = write_reports(report, resolved.out_dir, config=captured)
    for path in written:
        print(f"wrote {path}")

    total_runs = sum(a.runs for a in report.algorithms)
    total_diverged = sum(a.diverged_runs for a in report.algorithms)
    if total_runs > 0 and total_diverged == total_runs:
        print("every run of every algorithm diverged", file=sys.stderr)
        return EXIT_ALL_DIVERGED
    return EXIT_OK


def _read_curve(path: Path) -> tuple[list[int], list[float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        times, values = [], []
        for row in reader:
            times.append(int(row[0]))
            values.append(float(row[1]))
    return times, values


def _cmd_report(args: argparse.Namespace) -> int:
    out = Path(args.out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise DataError(f"{manifest_path} not found; run an experiment first")
    manifest = json.loads(manifest_path.read_text())
    summary: dict = {"version": manifest.get("version"), "algorithms": {}}
    window = args.final_window
    for label, counts in sorted((manifest.get("results") or {}).items()):
        entry = dict(counts)
        mse_path = out / f"{label}_mse.csv"
        if mse_path.exists():
            _, mse = _read_curve(mse_path)
            tail = mse[-window:] if window and len(mse) >= 1 else mse
            entry["mean_mse"] = sum(mse) / len(mse)
            entry["final_window_mean_mse"] = sum(tail) / len(tail)
        deg_path = out / f"{label}_degree.csv"
        if deg_path.exists():
            _, deg = _read_curve(deg_path)
            entry["mean_degree"] = sum(deg) / len(deg)
            entry["distinct_degree_values"] = len(set(deg))
        summary["algorithms"][label] = entry
    summary["final_window"] = window
    out_path = out / "summary.json"
    out_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(f"wrote {out_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynhop",
        description="Dynamic multi-hop topologies and online graph-signal estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="emit a synthetic dataset CSV and graph CSV")
    synth.add_argument("--out-dir", required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--nodes", type=int, default=24)
    synth.add_argument("--edges", type=int, default=38)
    synth.add_argument("--steps", type=int, default=200)
    synth.add_argument("--regimes", type=int, default=2)
    synth.add_argument("--switch-times", type=int, nargs="*", default=None)
    synth.add_argument("--bandlimit", type=float, default=0.4)
    synth.set_defaults(func=_cmd_synth)

    build = sub.add_parser("build-graph", help="derive a static graph from a series CSV")
    build.add_argument("series_csv")
    build.add_argument("--out", required=True)
    build.add_argument("--top-k", type=int, default=3)
    build.add_argument("--threshold", type=float, default=0.95)
    build.add_argument("--train-end", type=int, default=None,
                       help="use only the first N rows (1-based inclusive)")
    build.set_defaults(func=_cmd_build_graph)

    run = sub.add_parser("run", help="run a configured experiment and write reports")
    run.add_argument("--config", default=None)
    run.add_argument("--preset", choices=sorted(PRESETS), default=None)
    run.add_argument("--out-dir", default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--snr", type=float, default=None)
    run.add_argument("--snr-db", action="store_true",
                     help="interpret --snr (and the config snr) in decibels")
    run.add_argument("--missing-frac", type=float, default=None)
    run.add_argument("--runs", type=int, default=None)
    run.add_argument("--hops", type=int, default=None)
    run.add_argument("--tau", type=float, default=None)
    run.add_argument("--window", type=int, default=None)
    run.add_argument("--stride", type=int, default=None)
    run.add_argument("--mu", type=float, default=None)
    run.add_argument("--mu-min", type=float, default=None)
    run.add_argument("--mu-max", type=float, default=None)
    run.add_argument("--algo", action="append", default=None,
                     help="replace the algorithm list (repeatable)")
    run.set_defaults(func=_cmd_run)

    rep = sub.add_parser("report", help="merge written reports into summary.json")
    rep.add_argument("--out-dir", required=True)
    rep.add_argument("--final-window", type=int, default=50)
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
