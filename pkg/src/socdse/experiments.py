"""Experiment drivers and artifact emission: the machinery behind the CLI.

Every artifact embeds the experiment hash (over the input files and
parameters), the seed and the tool version, so re-running a spec reproduces
numerically identical outputs.
"""
from __future__ import annotations

import csv
import hashlib
import json
import statistics
import time
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

from . import __version__
from .budget import Budget, MetricValues, distance_to_budget
from .database import IpDatabase
from .errors import SchemaError
from .explorer import (
    AnnealOutcome,
    ExplorationTrace,
    ExplorerConfig,
    analyze_codesign,
    anneal,
)
from .hardware import DesignPoint, base_design
from .moves import random_feasible_move
from .oracle import OracleConfig, oracle_simulate
from .simulator import SimResult, simulate
from .workload import SynthSpec, TaskGraph, parse_workload, synth_workload

MODES = ("simulate", "explore", "ablate", "sweep", "divide_conquer", "validate", "report")


@dataclass
class ExperimentSpec:
    mode: str
    workload_paths: tuple[str, ...] = ()
    db_path: str | None = None
    budget_path: str | None = None
    design_path: str | None = None
    out_dir: str = "out"
    seed: int = 0
    config: ExplorerConfig = field(default_factory=ExplorerConfig)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise SchemaError(f"unknown mode {self.mode!r}")
        for path in list(self.workload_paths) + [self.db_path, self.budget_path,
                                                 self.design_path]:
            if path is not None and not Path(path).is_file():
                raise SchemaError(f"input file {path!r} does not exist")

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.mode.encode())
        for path in list(self.workload_paths) + [self.db_path, self.budget_path,
                                                 self.design_path]:
            if path is not None:
                h.update(Path(path).read_bytes())
        h.update(json.dumps({
            "seed": self.seed,
            "config": {k: v for k, v in vars(self.config).items()
                       if k not in ("checkpoint_path",)},
            "extra": self.extra,
        }, sort_keys=True, default=str).encode())
        return h.hexdigest()[:16]

    def header(self) -> dict:
        return {"spec_hash": self.digest(), "seed": self.seed, "tool_version": __version__}


def load_workloads(paths) -> list[TaskGraph]:
    return [parse_workload(Path(p).read_text()) for p in paths]


def load_db(path) -> IpDatabase:
    return IpDatabase.from_json(Path(path).read_text())


def load_budget(path) -> Budget:
    return Budget.from_json(Path(path).read_text())


def _check_budget_covers(graphs, budget: Budget):
    names = {g.name for g in graphs}
    budgeted = set(budget.latency_s)
    if names != budgeted:
        raise SchemaError(
            f"budget names {sorted(budgeted)} do not match workloads {sorted(names)}")


def _write_json(path: Path, header: dict, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump({**header, **payload}, fh, indent=2, sort_keys=True)


def _write_csv(path: Path, header: dict, columns, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"# {json.dumps(header, sort_keys=True)}"])
        writer.writerow(columns)
        writer.writerows(rows)


# -- aggregate metrics ---------------------------------------------------------------

def coefficient_of_variation(values) -> float:
    """Population standard deviation over mean; 0 for constants and empties."""
    values = list(values)
    if not values:
        return 0.0
    mean = statistics.fmean(values)
    if mean == 0:
        return 0.0
    return statistics.pstdev(values) / mean


def accelerator_level_parallelism(result: SimResult) -> float:
    """Phase-duration-weighted mean count of simultaneously busy PEs."""
    if result.makespan <= 0:
        return 0.0
    weighted = sum(p.duration * len(p.busy_pes) for p in result.phases)
    return weighted / result.makespan


def design_summary(design: DesignPoint, db: IpDatabase, result: SimResult | None) -> dict:
    blocks = design.topology.blocks
    counts = {"pe_gpp": 0, "pe_acc": 0, "noc": 0, "mem_dram": 0, "mem_sram": 0}
    for blk in blocks.values():
        counts[blk.kind.value] += 1
    nocs = [b for b in blocks.values() if b.kind.is_noc]
    mems = [b for b in blocks.values() if b.kind.is_mem]
    mem_areas = []
    for b in mems:
        mem_areas.append(db.mem_entry(b.kind.mem_kind, b.freq_mhz, b.bus_width_b).area_mm2)
    summary = {
        "block_counts": counts,
        "block_total": len(blocks),
        "noc_freq_cv": coefficient_of_variation([b.freq_mhz for b in nocs]),
        "noc_width_cv": coefficient_of_variation([b.bus_width_b for b in nocs]),
        "noc_link_cv": coefficient_of_variation([b.links for b in nocs]),
        "mem_size_cv": coefficient_of_variation(mem_areas),
        "mem_total_area_mm2": sum(mem_areas),
    }
    if result is not None:
        total_bn = sum(result.bottleneck_by_kind.values()) or 1.0
        summary["alp"] = accelerator_level_parallelism(result)
        summary["bottleneck_share"] = {
            kind: t / total_bn for kind, t in sorted(result.bottleneck_by_kind.items())
        }
    return summary


# -- drivers ------------------------------------------------------------------------------

def run_simulate(spec: ExperimentSpec) -> dict:
    graphs = load_workloads(spec.workload_paths)
    db = load_db(spec.db_path)
    if spec.design_path:
        design = DesignPoint.from_dict(json.loads(Path(spec.design_path).read_text()))
    else:
        design = base_design(graphs, db)
    result = simulate(design, graphs, db)
    out = Path(spec.out_dir)
    _write_json(out / "sim_result.json", spec.header(), result.to_json_dict())
    return result.to_json_dict()


def run_explore(spec: ExperimentSpec, *, awareness: str = "full") -> AnnealOutcome:
    graphs = load_workloads(spec.workload_paths)
    db = load_db(spec.db_path)
    budget = load_budget(spec.budget_path)
    _check_budget_covers(graphs, budget)
    outcome = anneal(graphs, budget, db, spec.config, awareness=awareness)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = spec.header()

    outcome.trace.write_csv(out / "trace.csv", header=header)
    _write_json(out / "trace.json", header, outcome.trace.to_json_dict())
    _write_json(out / "best_design.json", header, outcome.best_design.to_dict())
    _write_json(out / "best_result.json", header, outcome.best_result.to_json_dict())
    _write_json(out / "summary.json", header, {
        "converged": outcome.converged,
        "iterations": outcome.iterations,
        "best_distance": outcome.best_distance,
        "awareness": awareness,
        "design_summary": design_summary(outcome.best_design, db, outcome.best_result),
    })
    write_report(spec, outcome.trace, outcome.best_result, outcome.best_design, db)
    return outcome


CONVERGENCE_CSV_COLUMNS = ("iteration", "accepted_distance", "best_distance", "temperature")
CODESIGN_CSV_COLUMNS = ("vector", "deployment_rate", "convergence_attribution")


def write_report(spec: ExperimentSpec, trace: ExplorationTrace,
                 result: SimResult | None, design: DesignPoint | None,
                 db: IpDatabase | None) -> dict:
    """Plot-ready analytics for a finished run."""
    out = Path(spec.out_dir)
    header = spec.header()
    _write_csv(out / "convergence.csv", header, CONVERGENCE_CSV_COLUMNS, [
        (r.iteration, repr(r.accepted_distance), repr(r.best_distance),
         repr(r.temperature))
        for r in trace.records
    ])
    codesign = analyze_codesign(trace) if trace.records else {}
    _write_csv(out / "codesign.csv", header, CODESIGN_CSV_COLUMNS, [
        (vector, repr(stats["deployment_rate"]), repr(stats["convergence_attribution"]))
        for vector, stats in sorted(codesign.items())
    ])
    payload = {"codesign": codesign}
    if result is not None and design is not None and db is not None:
        payload["design_summary"] = design_summary(design, db, result)
        # how often moves leaned on task- vs loop-level parallelism
        tlp = sum(1 for r in trace.records if r.move_type in ("fork", "migrate"))
        llp = sum(1 for r in trace.records if "unroll" in r.low_level)
        payload["parallelism_usage"] = {
            "task_level_moves": tlp,
            "loop_level_moves": llp,
            "iterations": len(trace.records),
        }
    _write_json(out / "report.json", header, payload)
    return payload


def pareto_front(points, key=lambda p: p):
    """Non-dominated subset under component-wise minimization."""
    front = []
    for p in points:
        kp = key(p)
        dominated = any(
            key(q) != kp and all(a <= b for a, b in zip(key(q), kp))
            for q in points
        )
        if not dominated:
            front.append(p)
    return front


PARETO_CSV_COLUMNS = ("candidate", "source", "power_w", "area_mm2",
                      "latencies_json", "meets_latency", "on_front")


def run_sweep(spec: ExperimentSpec, *, grid_pct: float = 5.0) -> dict:
    """Per-workload budget sweep with Pareto-front extraction and full-system
    permutation of the per-workload fronts."""
    graphs = load_workloads(spec.workload_paths)
    db = load_db(spec.db_path)
    system_budget = load_budget(spec.budget_path)
    _check_budget_covers(graphs, system_budget)
    fractions = [grid_pct / 100.0 * i for i in range(1, int(100 / grid_pct) + 1)]

    per_workload: dict[str, list[dict]] = {}
    for g in graphs:
        points = []
        for frac in fractions:
            budget = Budget(
                {g.name: system_budget.latency_s[g.name]},
                system_budget.power_w * frac,
                system_budget.area_mm2 * frac,
                system_budget.alpha_met,
            )
            outcome = anneal([g], budget, db, spec.config)
            values = outcome.best_values
            points.append({
                "workload": g.name,
                "fraction": frac,
                "power_w": values.power_w,
                "area_mm2": values.area_mm2,
                "latency_s": values.latency_s[g.name],
                "meets_latency": values.latency_s[g.name] <= budget.latency_s[g.name],
                "design": outcome.best_design,
            })
        eligible = [p for p in points if p["meets_latency"]] or points
        front = pareto_front(eligible, key=lambda p: (p["power_w"], p["area_mm2"]))
        for p in points:
            p["on_front"] = p in front
        per_workload[g.name] = points

    fronts = {name: [p for p in pts if p["on_front"]]
              for name, pts in per_workload.items()}
    combos = []
    for combo in product(*(fronts[g.name] for g in graphs)):
        combos.append({
            "parts": {p["workload"]: p for p in combo},
            "power_w": sum(p["power_w"] for p in combo),
            "area_mm2": sum(p["area_mm2"] for p in combo),
            "latencies": {p["workload"]: p["latency_s"] for p in combo},
        })
    combo_front = pareto_front(combos, key=lambda c: (c["power_w"], c["area_mm2"]))
    for c in combos:
        c["on_front"] = c in combo_front

    out = Path(spec.out_dir)
    header = spec.header()
    rows = []
    idx = 0
    for name, pts in sorted(per_workload.items()):
        for p in pts:
            rows.append((idx, name, repr(p["power_w"]), repr(p["area_mm2"]),
                         json.dumps({name: p["latency_s"]}),
                         int(p["meets_latency"]), int(p["on_front"])))
            idx += 1
    for c in combos:
        rows.append((idx, "system", repr(c["power_w"]), repr(c["area_mm2"]),
                     json.dumps(dict(sorted(c["latencies"].items()))), 1,
                     int(c["on_front"])))
        idx += 1
    _write_csv(out / "pareto.csv", header, PARETO_CSV_COLUMNS, rows)
    summary = {
        "grid_pct": grid_pct,
        "front_sizes": {name: len(front) for name, front in sorted(fronts.items())},
        "permutations": len(combos),
        "system_front": len(combo_front),
    }
    _write_json(out / "sweep_summary.json", header, summary)
    return {"per_workload": per_workload, "combos": combos, "summary": summary}


def compose_metrics(parts: dict[str, MetricValues]) -> MetricValues:
    """Metrics of independent subsystems glued into one SoC: areas and powers
    add, each workload keeps its own latency."""
    latencies = {}
    for values in parts.values():
        latencies.update(values.latency_s)
    return MetricValues(
        latency_s=latencies,
        power_w=sum(v.power_w for v in parts.values()),
        area_mm2=sum(v.area_mm2 for v in parts.values()),
    )


def run_divide_conquer(spec: ExperimentSpec,
                       sub_budgets: dict[str, dict] | None = None) -> dict:
    """Isolated per-workload exploration versus one holistic run.

    With explicit sub-budgets this reproduces hand-estimated budgeting; the
    per-workload signed distance shows which estimates were too tight
    (negative: never met) and which too loose.
    """
    graphs = load_workloads(spec.workload_paths)
    db = load_db(spec.db_path)
    system_budget = load_budget(spec.budget_path)
    _check_budget_covers(graphs, system_budget)

    if sub_budgets is None:
        share = 1.0 / max(len(graphs), 1)
        sub_budgets = {g.name: {"power_w": system_budget.power_w * share,
                                "area_mm2": system_budget.area_mm2 * share}
                       for g in graphs}

    parts: dict[str, MetricValues] = {}
    signed: dict[str, dict[str, float]] = {}
    for g in graphs:
        sub = sub_budgets[g.name]
        budget = Budget({g.name: system_budget.latency_s[g.name]},
                        sub["power_w"], sub["area_mm2"], system_budget.alpha_met)
        outcome = anneal([g], budget, db, spec.config)
        parts[g.name] = outcome.best_values
        signed[g.name] = {
            "power": 100.0 * (sub["power_w"] - outcome.best_values.power_w)
                     / sub["power_w"],
            "area": 100.0 * (sub["area_mm2"] - outcome.best_values.area_mm2)
                    / sub["area_mm2"],
        }

    myopic = compose_metrics(parts)
    myopic_distance = distance_to_budget(myopic, system_budget)

    # match total search effort: the isolated runs spent one iteration cap
    # per workload, so the holistic run gets the same total
    holistic_cfg = replace(spec.config,
                           max_iterations=spec.config.max_iterations * len(graphs))
    holistic = anneal(graphs, system_budget, db, holistic_cfg)
    hv = holistic.best_values

    def deg(a, b):
        return (a - b) / b if b else 0.0

    report = {
        "myopic": {"power_w": myopic.power_w, "area_mm2": myopic.area_mm2,
                   "latencies_s": dict(sorted(myopic.latency_s.items())),
                   "distance": myopic_distance,
                   "signed_distance_pct": signed},
        "holistic": {"power_w": hv.power_w, "area_mm2": hv.area_mm2,
                     "latencies_s": dict(sorted(hv.latency_s.items())),
                     "distance": holistic.best_distance,
                     "converged": holistic.converged},
        "degradation": {
            "power": deg(myopic.power_w, hv.power_w),
            "area": deg(myopic.area_mm2, hv.area_mm2),
            "distance": myopic_distance - holistic.best_distance,
        },
    }
    _write_json(Path(spec.out_dir) / "divide_conquer.json", spec.header(), report)
    return report


def run_validate(spec: ExperimentSpec, *, dt_rel: float = 1e-4, trials: int = 20,
                 max_moves: int = 12) -> dict:
    """Cross-check the phase simulator against the fixed-timestep reference on
    random (design, workload) pairs; reports accuracy and speed ratio."""
    import random as _random

    rng = _random.Random(spec.seed)
    rows = []
    errors = []
    ratios = []
    for trial in range(trials):
        graphs = [synth_workload(SynthSpec(
            name=f"w{trial}", shape=rng.choice(("chain", "diamond", "fanout", "random")),
            n=rng.randint(3, 10), seed=rng.randint(0, 10**6)))]
        db = load_db(spec.db_path) if spec.db_path else None
        if db is None:
            from .database import build_grid_database
            db = build_grid_database(graphs)
        design = base_design(graphs, db)
        for _ in range(rng.randint(0, max_moves)):
            try:
                _, design = random_feasible_move(design, graphs, db, rng)
            except Exception:
                break

        t0 = time.perf_counter()
        fast = simulate(design, graphs, db)
        t1 = time.perf_counter()
        slow = oracle_simulate(design, graphs, db,
                               OracleConfig(dt=dt_rel, relative=True),
                               reference_makespan=fast.makespan)
        t2 = time.perf_counter()
        rel = abs(fast.makespan - slow.makespan) / slow.makespan
        errors.append(rel)
        ratios.append((t2 - t1) / max(t1 - t0, 1e-12))
        rows.append((trial, repr(fast.makespan), repr(slow.makespan), repr(rel),
                     repr(ratios[-1])))

    summary = {
        "trials": trials,
        "dt_rel": dt_rel,
        "max_rel_error": max(errors),
        "mean_rel_error": statistics.fmean(errors),
        "median_speed_ratio": statistics.median(ratios),
    }
    out = Path(spec.out_dir)
    _write_csv(out / "validation.csv", spec.header(),
               ("trial", "phase_makespan_s", "oracle_makespan_s", "rel_error",
                "speed_ratio"), rows)
    _write_json(out / "validation.json", spec.header(), summary)
    return summary
