"""Command-line surface.

Subcommands: simulate, explore, ablate, sweep, divide-conquer, validate,
report.  All numeric output uses SI base units with unit-suffixed names.
Set SOCDSE_LOG=debug for verbose logging.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import SocDseError
from .experiments import (
    ExperimentSpec,
    run_divide_conquer,
    run_explore,
    run_simulate,
    run_sweep,
    run_validate,
    write_report,
)
from .explorer import ExplorationTrace, ExplorerConfig

log = logging.getLogger("socdse")


def _add_common(parser, *, workloads=True, db=True, budget=False):
    if workloads:
        parser.add_argument("--workloads", nargs="+", required=True,
                            metavar="FILE", help="workload JSON files")
    if db:
        parser.add_argument("--db", required=True, metavar="FILE",
                            help="IP database JSON file")
    if budget:
        parser.add_argument("--budget", required=True, metavar="FILE",
                            help="budget JSON file")
    parser.add_argument("--out", default="out", metavar="DIR",
                        help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=0)


def _add_explorer_knobs(parser):
    parser.add_argument("--config", metavar="FILE",
                        help="explorer config JSON (overrides the flags below)")
    parser.add_argument("--neighbors", type=int, default=4)
    parser.add_argument("--max-iterations", type=int, default=200)
    parser.add_argument("--cooling", type=float, default=0.98)
    parser.add_argument("--epsilon", type=float, default=0.1)
    parser.add_argument("--checkpoint", metavar="FILE", default=None)
    parser.add_argument("--checkpoint-every", type=int, default=0)


def _config_from(args) -> ExplorerConfig:
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
        doc.setdefault("seed", args.seed)
        return ExplorerConfig(**doc)
    return ExplorerConfig(
        neighbors=args.neighbors,
        max_iterations=args.max_iterations,
        cooling=args.cooling,
        epsilon=args.epsilon,
        seed=args.seed,
        checkpoint_path=args.checkpoint,
        checkpoint_every=args.checkpoint_every,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socdse",
        description="Phase-driven SoC simulation and design-space exploration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evaluate one design on a workload set")
    p.add_argument("--design", metavar="FILE", default=None,
                   help="design JSON (default: the base design)")
    _add_common(p)

    p = sub.add_parser("explore", help="run the architecture-aware annealer")
    _add_common(p, budget=True)
    _add_explorer_knobs(p)

    p = sub.add_parser("ablate", help="run an awareness-ladder baseline")
    p.add_argument("--level", choices=("sa", "task", "taskblock", "full"),
                   required=True)
    _add_common(p, budget=True)
    _add_explorer_knobs(p)

    p = sub.add_parser("sweep", help="per-workload budget sweep with Pareto fronts")
    p.add_argument("--grid-pct", type=float, default=5.0,
                   help="budget grid increment in percent (default: 5)")
    _add_common(p, budget=True)
    _add_explorer_knobs(p)

    p = sub.add_parser("divide-conquer",
                       help="isolated per-workload runs vs one holistic run")
    p.add_argument("--sub-budgets", metavar="FILE", default=None,
                   help="JSON {workload: {power_w, area_mm2}}; default splits evenly")
    _add_common(p, budget=True)
    _add_explorer_knobs(p)

    p = sub.add_parser("validate",
                       help="compare against the fixed-timestep reference")
    p.add_argument("--dt", type=float, default=1e-4,
                   help="timestep as a fraction of the makespan (default 1e-4)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--db", metavar="FILE", default=None,
                   help="IP database JSON (default: a generated grid)")
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("report", help="re-emit analytics from a saved trace")
    p.add_argument("--trace", required=True, metavar="FILE")
    p.add_argument("--out", default=None, metavar="DIR",
                   help="output directory (default: the trace's directory)")
    p.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("SOCDSE_LOG", "warning").upper(),
                      logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SocDseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "simulate":
        spec = ExperimentSpec(
            mode="simulate", workload_paths=tuple(args.workloads), db_path=args.db,
            design_path=args.design, out_dir=args.out, seed=args.seed)
        payload = run_simulate(spec)
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0

    if args.command in ("explore", "ablate"):
        spec = ExperimentSpec(
            mode="explore" if args.command == "explore" else "ablate",
            workload_paths=tuple(args.workloads), db_path=args.db,
            budget_path=args.budget, out_dir=args.out, seed=args.seed,
            config=_config_from(args))
        level = getattr(args, "level", "full")
        outcome = run_explore(spec, awareness=level)
        print(json.dumps({
            "converged": outcome.converged,
            "iterations": outcome.iterations,
            "best_distance": outcome.best_distance,
            "out_dir": args.out,
        }, indent=2, sort_keys=True))
        return 0

    if args.command == "sweep":
        spec = ExperimentSpec(
            mode="sweep", workload_paths=tuple(args.workloads), db_path=args.db,
            budget_path=args.budget, out_dir=args.out, seed=args.seed,
            config=_config_from(args), extra={"grid_pct": args.grid_pct})
        result = run_sweep(spec, grid_pct=args.grid_pct)
        print(json.dumps(result["summary"], indent=2, sort_keys=True))
        return 0

    if args.command == "divide-conquer":
        sub_budgets = None
        if args.sub_budgets:
            sub_budgets = json.loads(Path(args.sub_budgets).read_text())
        spec = ExperimentSpec(
            mode="divide_conquer", workload_paths=tuple(args.workloads),
            db_path=args.db, budget_path=args.budget, out_dir=args.out,
            seed=args.seed, config=_config_from(args))
        report = run_divide_conquer(spec, sub_budgets)
        print(json.dumps(report, indent=2, sort_keys=True))
        return 0

    if args.command == "validate":
        spec = ExperimentSpec(mode="validate", db_path=args.db, out_dir=args.out,
                              seed=args.seed)
        summary = run_validate(spec, dt_rel=args.dt, trials=args.trials)
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0

    if args.command == "report":
        trace_path = Path(args.trace)
        doc = json.loads(trace_path.read_text())
        trace = ExplorationTrace.from_json_dict(doc)
        out_dir = args.out or str(trace_path.parent)
        spec = ExperimentSpec(mode="report", out_dir=out_dir, seed=args.seed)
        payload = write_report(spec, trace, None, None, None)
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
