"""Command line entry point: ``clusterlife {analyze,generate,score,stats,plotdata}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import io
from .estimator import analyze
from .model import AnalysisParams
from .scenarios import KINDS, ScenarioSpec, generate, scenario_params, score
from .stats import lifecycle_statistics

log = logging.getLogger("clusterlife")

_PARAM_FLAGS = [
    ("r_e", float, "error radius"),
    ("r_n", float, "neighbourhood radius"),
    ("r_g_error", float, "group stop radius"),
    ("eps", float, "DBSCAN radius"),
    ("max_dist_centroid", float, "centroid distance cutoff for cluster comparison"),
    ("min_pts", int, "DBSCAN density threshold (default 3)"),
    ("min_cluster", int, "minimum valid cluster size (default 3)"),
    ("min_shared", float, "shared-member fraction for identity (default 0.5)"),
    ("partial_shared", float, "contributor fraction for merge/split (default 0.25)"),
    ("interval", int, "universal tick spacing (default 1)"),
    ("staleness_window", int, "max reading age in ticks (default: interval)"),
    ("grid_cell", float, "grid cell edge, 0 disables partitioning (default 0)"),
    ("halo", float, "grid halo width (default 2*eps)"),
]


def _add_analyze(sub):
    p = sub.add_parser("analyze", help="run the full lifecycle pipeline on a trajectory CSV")
    p.add_argument("--input", "-i", help="trajectory CSV (traj_id,tick,x,y)")
    p.add_argument("--output", "-o", help="results file (JSON lines)")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--workers", type=int, help="worker processes for grid cells")
    p.add_argument("--plot-data", dest="plot_data", help="also write per-tick plot CSV here")
    for name, typ, text in _PARAM_FLAGS:
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, help=text)
    p.set_defaults(func=cmd_analyze)


def cmd_analyze(args) -> int:
    values = io.load_config(args.config) if args.config else {}
    for key in [n for n, _, _ in _PARAM_FLAGS] + ["input", "output", "workers", "plot_data"]:
        if getattr(args, key, None) is not None:
            values[key] = getattr(args, key)
    config = io.build_run_config(values)
    if not config.input or not config.output:
        raise ValueError("both an input and an output path are required")
    params = AnalysisParams(**config.params)
    trajectories = io.load_trajectories(config.input)
    log.info("loaded %d trajectories from %s", len(trajectories), config.input)
    result = analyze(trajectories, params, config.workers)
    io.export_results(result.lifecycles, result.statistics, result.border_report, config.output)
    if config.plot_data:
        io.emit_plot_data(result.lifecycles, config.plot_data)
    log.info("%d lifecycles, %d events -> %s", len(result.lifecycles), len(result.events),
             config.output)
    return 0


def _add_generate(sub):
    p = sub.add_parser("generate", help="write a synthetic scenario and its ground truth")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=2)
    p.add_argument("--members", type=int, default=6)
    p.add_argument("--horizon", type=int, default=30)
    p.add_argument("--noise", type=int, default=4)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--data", required=True, help="trajectory CSV to write")
    p.add_argument("--truth", required=True, help="truth events file to write")
    p.add_argument("--params", help="also write matching analysis parameters (key=value)")
    p.set_defaults(func=cmd_generate)


def cmd_generate(args) -> int:
    spec = ScenarioSpec(args.kind, args.clusters, args.members, args.horizon, args.noise,
                        args.scale, args.seed)
    trajectories, truth = generate(spec)
    io.write_trajectories(trajectories, args.data)
    io.export_truth(truth, args.truth)
    if args.params:
        params = scenario_params(spec)
        with open(args.params, "w") as fh:
            for name in ("r_e", "r_n", "r_g_error", "eps", "max_dist_centroid", "min_pts",
                         "min_cluster", "min_shared", "partial_shared", "interval"):
                fh.write(f"{name}={getattr(params, name)}\n")
    return 0


def _add_score(sub):
    p = sub.add_parser("score", help="precision/recall of detected events against truth")
    p.add_argument("--detected", required=True, help="results file from analyze")
    p.add_argument("--truth", required=True, help="truth file from generate")
    p.add_argument("--tolerance", type=int, default=1, help="tick tolerance (default 1)")
    p.set_defaults(func=cmd_score)


def cmd_score(args) -> int:
    report = score(io.load_events(args.detected), io.load_truth(args.truth), args.tolerance)
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _add_stats(sub):
    p = sub.add_parser("stats", help="lifecycle statistics from a results file")
    p.add_argument("results")
    p.add_argument("--horizon", type=int, help="observed span in ticks (default: from the file)")
    p.add_argument("--start-tick", type=int, dest="start_tick")
    p.set_defaults(func=cmd_stats)


def cmd_stats(args) -> int:
    lifecycles, stored, _ = io.load_results(args.results)
    horizon = args.horizon if args.horizon is not None else stored.get("horizon", 0)
    start = args.start_tick if args.start_tick is not None else stored.get("start_tick", 0)
    json.dump(lifecycle_statistics(lifecycles, horizon, start), sys.stdout, indent=2,
              sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _add_plotdata(sub):
    p = sub.add_parser("plotdata", help="per-tick series for plotting")
    p.add_argument("results")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=cmd_plotdata)


def cmd_plotdata(args) -> int:
    lifecycles, _, _ = io.load_results(args.results)
    io.emit_plot_data(lifecycles, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterlife", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for add in (_add_analyze, _add_generate, _add_score, _add_stats, _add_plotdata):
        add(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"clusterlife: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
