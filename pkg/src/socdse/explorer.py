"""Architecture-aware simulated annealing over design points.

Each iteration picks the metric farthest from budget, the task and block
responsible for it, and a mutation chosen by architectural reasoning
(parallelism, locality, customization) with development-cost-aware sampling:
cheap moves (join, migrate) are preferred over expensive ones (fork, swap,
fork+swap).  Candidate neighbors are simulated and the best is accepted, or a
worse one occasionally, governed by a cooling temperature.

Awareness is a ladder: "sa" mutates at random, "task" pins the bottleneck
task, "taskblock" pins task and block, "full" also reasons about the move.
All levels share this loop, so the full setting is the annealer itself.
"""
from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import asdict, dataclass, field

from .budget import (
    Budget,
    MetricValues,
    distance_to_budget,
    meets_budget,
    metric_overshoots,
    workload_overshoots,
)
from .database import IpDatabase
from .errors import (
    AllMetricsMetError,
    EmptyTraceError,
    ExhaustedCandidatesError,
    InfeasibleMoveError,
    NoApplicableMoveError,
)
from .hardware import DesignPoint, base_design, route
from .moves import (
    Fork,
    ForkSwap,
    Join,
    Migrate,
    Move,
    Swap,
    apply_move,
    invert_move,
    move_from_dict,
    move_to_dict,
    random_feasible_move,
)
from .simulator import SimResult, simulate
from .workload import TaskKey

DEFAULT_MOVE_WEIGHTS = {
    "join": 16.0,
    "migrate": 8.0,
    "fork": 4.0,
    "swap": 2.0,
    "fork_swap": 1.0,
}

AWARENESS_LEVELS = ("sa", "task", "taskblock", "full")

METRIC_ORDER = ("latency", "power", "area")


@dataclass
class ExplorerConfig:
    neighbors: int = 4
    max_iterations: int = 200
    initial_temperature: float | None = None
    cooling: float = 0.98
    temperature_floor: float = 0.01   # fraction of the initial temperature
    epsilon: float = 0.1
    restart_after: int = 25           # stagnant iterations before jumping to best
    seed: int = 0
    move_weights: dict = field(default_factory=lambda: dict(DEFAULT_MOVE_WEIGHTS))
    checkpoint_path: str | None = None
    checkpoint_every: int = 0

    def __post_init__(self):
        if self.neighbors < 1:
            raise ValueError("need at least one neighbor per iteration")
        if not 0.0 < self.cooling < 1.0:
            raise ValueError("cooling factor must be in (0, 1)")
        if self.initial_temperature is not None and self.initial_temperature <= 0:
            raise ValueError("temperature must be positive")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if self.restart_after < 1:
            raise ValueError("restart_after must be >= 1")


@dataclass
class IterationRecord:
    iteration: int
    metric: str
    workload: str
    task: str
    block: str
    move_type: str
    move_detail: str
    high_level: str
    low_level: str
    bottleneck_kind: str
    used_move_reasoning: bool
    candidate_distances: tuple[float, ...]
    accepted: bool
    accepted_distance: float
    best_distance: float
    temperature: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["candidate_distances"] = list(self.candidate_distances)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "IterationRecord":
        doc = dict(doc)
        doc["candidate_distances"] = tuple(doc["candidate_distances"])
        return cls(**doc)


TRACE_CSV_COLUMNS = (
    "iteration", "metric", "workload", "task", "block", "move_type",
    "move_detail", "high_level", "low_level", "bottleneck_kind",
    "used_move_reasoning", "candidate_distances", "accepted",
    "accepted_distance", "best_distance", "temperature",
)


@dataclass
class ExplorationTrace:
    records: list[IterationRecord] = field(default_factory=list)
    seed: int = 0
    awareness: str = "full"
    checkpoints: list[int] = field(default_factory=list)

    def append(self, record: IterationRecord):
        self.records.append(record)

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "awareness": self.awareness,
            "checkpoints": list(self.checkpoints),
            "records": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ExplorationTrace":
        return cls(
            records=[IterationRecord.from_dict(r) for r in doc["records"]],
            seed=doc.get("seed", 0),
            awareness=doc.get("awareness", "full"),
            checkpoints=list(doc.get("checkpoints", [])),
        )

    def write_csv(self, path, header: dict | None = None):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if header:
                writer.writerow([f"# {json.dumps(header, sort_keys=True)}"])
            writer.writerow(TRACE_CSV_COLUMNS)
            for r in self.records:
                writer.writerow([
                    r.iteration, r.metric, r.workload, r.task, r.block,
                    r.move_type, r.move_detail, r.high_level, r.low_level,
                    r.bottleneck_kind, int(r.used_move_reasoning),
                    "|".join(repr(d) for d in r.candidate_distances),
                    int(r.accepted), repr(r.accepted_distance),
                    repr(r.best_distance), repr(r.temperature),
                ])


# -- selection -----------------------------------------------------------------------

def select_metric(values: MetricValues, budget: Budget, rng: random.Random,
                  epsilon: float = 0.0) -> str:
    """The metric farthest over budget; with probability epsilon a uniformly
    random unmet metric, enabling cross-metric co-design."""
    overshoots = metric_overshoots(values, budget)
    unmet = [m for m in METRIC_ORDER if overshoots[m] > 0]
    if not unmet:
        raise AllMetricsMetError("all metrics are at or below budget")
    if epsilon > 0 and rng.random() < epsilon:
        return rng.choice(unmet)
    best = unmet[0]
    for m in unmet[1:]:
        if overshoots[m] > overshoots[best]:
            best = m
    return best


def _rank_block_for_task(result: SimResult, design: DesignPoint, task: TaskKey) -> str:
    charges = result.task_bottleneck.get(task, {})
    if charges:
        blocks = design.topology.blocks

        def order(item):
            bid, t = item
            return (-t, 0 if blocks[bid].kind.is_pe else 1, bid)

        return sorted(charges.items(), key=order)[0][0]
    return design.mapping.task_to_pe[task]


def select_task_block(result: SimResult, metric: str, design: DesignPoint,
                      graphs, budget: Budget, k: int = 1) -> tuple[TaskKey, str]:
    """The k-th strongest contributor to the metric and its bottleneck.

    k escalates when iterations stop improving, walking down the ranking;
    past the end raises ExhaustedCandidatesError.
    """
    if k < 1:
        raise ExhaustedCandidatesError(f"rank must be >= 1, got {k}")
    if metric == "latency":
        values = MetricValues.from_result(result)
        per_wl = workload_overshoots(values, budget)
        worst = sorted(per_wl.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        ranked = sorted(
            (t for t in result.task_active_time if t[0] == worst),
            key=lambda t: (-result.task_active_time[t], t),
        )
        if k > len(ranked):
            raise ExhaustedCandidatesError(f"only {len(ranked)} tasks in {worst!r}")
        task = ranked[k - 1]
        return task, _rank_block_for_task(result, design, task)

    if metric == "power":
        contribution = result.block_energy
    else:
        contribution = result.block_area
    ranked_blocks = sorted(contribution.items(), key=lambda kv: (-kv[1], kv[0]))
    if k > len(ranked_blocks):
        raise ExhaustedCandidatesError(f"only {len(ranked_blocks)} blocks")
    block = ranked_blocks[k - 1][0]

    weigher = result.block_task_energy if metric == "power" else result.block_task_work
    cands = sorted(
        ((key, w) for (bid, key), w in weigher.items() if bid == block),
        key=lambda kv: (-kv[1], kv[0]),
    )
    if cands:
        task = cands[0][0]
    else:
        touching = design.tasks_touching(block, graphs)
        if touching:
            task = touching[0]
        else:
            everything = sorted(key for g in graphs for key in g.task_keys())
            if not everything:
                raise ExhaustedCandidatesError("no tasks to target")
            task = everything[0]
    return task, block


# -- architectural reasoning -------------------------------------------------------------

def _incomparable(graphs_by_name, a: TaskKey, b: TaskKey) -> bool:
    if a[0] != b[0]:
        return True   # separate workloads always overlap
    return not graphs_by_name[a[0]].is_comparable(a[1], b[1])


def _block_has_parallel_tasks(design, graphs, block: str) -> bool:
    graphs_by_name = {g.name: g for g in graphs}
    hosted = design.tasks_touching(block, graphs)
    for i, a in enumerate(hosted):
        for b in hosted[i + 1:]:
            if _incomparable(graphs_by_name, a, b):
                return True
    return False


def _task_runs_parallel_elsewhere(design, graphs, task: TaskKey) -> bool:
    graphs_by_name = {g.name: g for g in graphs}
    home = design.mapping.task_to_pe[task]
    for other, pe in design.mapping.task_to_pe.items():
        if other != task and pe != home and _incomparable(graphs_by_name, task, other):
            return True
    return False


_SWAP_PREFS = {
    ("latency", "pe"): (("subtype", "up"), ("unroll", "up"), ("freq", "up")),
    ("latency", "noc"): (("freq", "up"), ("bus_width", "up")),
    ("latency", "mem"): (("freq", "up"), ("bus_width", "up")),
    ("power", "pe"): (("freq", "down"), ("unroll", "down"), ("subtype", "down")),
    ("power", "noc"): (("freq", "down"), ("bus_width", "down")),
    ("power", "mem"): (("freq", "down"), ("bus_width", "down")),
    ("area", "pe"): (("unroll", "down"), ("subtype", "down"), ("freq", "down")),
    ("area", "noc"): (("bus_width", "down"), ("freq", "down")),
    ("area", "mem"): (("bus_width", "down"), ("subtype", "down"), ("freq", "down")),
}


def _kind_class(design, block: str) -> str:
    kind = design.topology.blocks[block].kind
    if kind.is_pe:
        return "pe"
    if kind.is_mem:
        return "mem"
    return "noc"


def _try(design, move, graphs, db):
    try:
        new = apply_move(design, move, graphs, db)
    except InfeasibleMoveError:
        return None
    return new.provenance[-1], new


def _ranked_choice(options, rng, decay=0.5):
    """Pick from best-first options; each rank is half as likely as the one
    before it, keeping candidate sets diverse without losing the bias."""
    if not options:
        return None
    weights = [decay ** i for i in range(len(options))]
    total = sum(weights)
    pick = rng.random() * total
    acc = 0.0
    for opt, w in zip(options, weights):
        acc += w
        if pick < acc:
            return opt
    return options[-1]


def _concretize_swap(metric, block, design, graphs, db, rng):
    hits = []
    for knob, direction in _SWAP_PREFS[(metric, _kind_class(design, block))]:
        hit = _try(design, Swap(block, knob, direction), graphs, db)
        if hit:
            hits.append(hit)
    return _ranked_choice(hits, rng)


def _concretize_fork(metric, task, block, design, graphs, db, rng):
    return _try(design, Fork(block, (task,)), graphs, db)


def _concretize_fork_swap(metric, task, block, design, graphs, db, rng):
    hits = []
    for knob, direction in _SWAP_PREFS[(metric, _kind_class(design, block))]:
        hit = _try(design, ForkSwap(Fork(block, (task,)), Swap("", knob, direction)),
                   graphs, db)
        if hit:
            hits.append(hit)
    return _ranked_choice(hits, rng)


def _concretize_join(metric, block, design, graphs, db, rng):
    knobs = design.topology.blocks[block].knobs()
    partners = [
        bid for bid, blk in sorted(design.topology.blocks.items())
        if bid != block and blk.knobs() == knobs
    ]
    hits = []
    for partner in partners:
        hit = _try(design, Join(survivor=partner, absorbed=block), graphs, db)
        if hit:
            hits.append(hit)
    return _ranked_choice(hits, rng)


def _route_hops(design, pe: str, mem: str) -> int:
    try:
        return len(route(design, pe, mem))
    except Exception:
        return 1 << 20


def _concretize_migrate(metric, task, block, design, graphs, db, rng):
    """Destination reasoning: shorten routes (locality) and, for latency,
    prefer lightly loaded targets (relax contention); for power and area,
    prefer loaded targets (consolidate, so emptied twins can join away)."""
    spread = 1 if metric == "latency" else -1
    mapping = design.mapping
    kindclass = _kind_class(design, block)
    scored = []
    if kindclass == "pe":
        mems = {mapping.edge_to_mem[rk[0]]
                for rk in mapping.routes if _owns(task, rk)}
        for dst in design.pes():
            if dst == block:
                continue
            hops = sum(_route_hops(design, dst, m) for m in sorted(mems)) if mems else 0
            scored.append(((hops, spread * len(design.tasks_on(dst)), dst), dst))
    elif kindclass == "mem":
        pe = mapping.task_to_pe[task]
        for dst in design.mems():
            if dst == block:
                continue
            scored.append(((_route_hops(design, pe, dst),
                            spread * len(design.flows_on_mem(dst)), dst), dst))
    else:
        through = {n: 0 for n in design.nocs()}
        for path in mapping.routes.values():
            for n in path:
                through[n] += 1
        for dst in design.nocs():
            if dst == block:
                continue
            scored.append(((spread * through[dst], dst), dst))
    hits = []
    for _, dst in sorted(scored):
        hit = _try(design, Migrate(task, block, dst), graphs, db)
        if hit:
            hits.append(hit)
            if len(hits) >= 6:
                break
    return _ranked_choice(hits, rng, decay=0.6)


def _owns(task: TaskKey, route_key) -> bool:
    (wl, src, dst), direction = route_key
    if wl != task[0]:
        return False
    owner = src if direction == "write" else dst
    if owner == "__io__":
        owner = dst if direction == "write" else src
    return owner == task[1]


def candidate_move_types(metric: str, task: TaskKey, block: str,
                         design: DesignPoint, graphs) -> list[str]:
    """Step I of move selection: architectural reasoning narrows the move set."""
    if metric == "latency":
        if _block_has_parallel_tasks(design, graphs, block):
            return ["migrate", "fork"]
        return ["swap", "fork_swap"]
    if metric == "power":
        if _task_runs_parallel_elsewhere(design, graphs, task):
            if not _block_has_parallel_tasks(design, graphs, block):
                return ["migrate"]
            return ["join"]
        return ["swap", "fork_swap"]
    # area
    if _kind_class(design, block) == "pe":
        return ["join", "swap"]
    return ["migrate", "join", "swap"]


def select_move(metric: str, task: TaskKey, block: str, design: DesignPoint,
                graphs, db: IpDatabase, rng: random.Random,
                weights: dict | None = None):
    """Steps II/III: order candidates by development cost and sample one,
    cheap moves proportionally more often.  Returns (move, mutated design)."""
    weights = weights or DEFAULT_MOVE_WEIGHTS
    candidates = candidate_move_types(metric, task, block, design, graphs)
    maker = {
        "swap": lambda: _concretize_swap(metric, block, design, graphs, db, rng),
        "fork": lambda: _concretize_fork(metric, task, block, design, graphs, db, rng),
        "fork_swap": lambda: _concretize_fork_swap(
            metric, task, block, design, graphs, db, rng),
        "join": lambda: _concretize_join(metric, block, design, graphs, db, rng),
        "migrate": lambda: _concretize_migrate(
            metric, task, block, design, graphs, db, rng),
    }
    pool = list(candidates)
    while pool:
        total = sum(weights.get(t, 1.0) for t in pool)
        pick = rng.random() * total
        acc = 0.0
        chosen = pool[-1]
        for t in pool:
            acc += weights.get(t, 1.0)
            if pick < acc:
                chosen = t
                break
        hit = maker[chosen]()
        if hit:
            return hit
        pool.remove(chosen)
    raise NoApplicableMoveError(
        f"no applicable move for {metric} on {block} (candidates {candidates})")


# -- annealing loop --------------------------------------------------------------------

_HIGH_LEVEL = {
    "migrate": "mapping",
    "fork": "allocation",
    "join": "allocation",
    "swap": "customization",
    "fork_swap": "customization",
    "swap_join": "allocation",
}


def _low_level(move: Move) -> str:
    if isinstance(move, Swap):
        return f"{move.knob}_{move.direction}"
    if isinstance(move, Migrate):
        return "migrate_task"
    if isinstance(move, Fork):
        return "duplicate_block"
    if isinstance(move, Join):
        return "merge_block"
    if isinstance(move, ForkSwap):
        return f"duplicate_then_{move.swap.knob}_{move.swap.direction}"
    return "merge_then_swap"


def _move_block(move: Move) -> str:
    if isinstance(move, Swap):
        return move.block
    if isinstance(move, Fork):
        return move.block
    if isinstance(move, Join):
        return move.absorbed
    if isinstance(move, Migrate):
        return move.src
    if isinstance(move, ForkSwap):
        return move.fork.block
    return move.join.absorbed


@dataclass
class AnnealOutcome:
    best_design: DesignPoint
    best_result: SimResult
    best_values: MetricValues
    best_distance: float
    final_design: DesignPoint
    trace: ExplorationTrace
    converged: bool
    iterations: int


def anneal(graphs, budget: Budget, db: IpDatabase, config: ExplorerConfig,
           *, awareness: str = "full", resume_from: str | None = None) -> AnnealOutcome:
    """Explore from the base design until the budget is met or iterations run
    out.  Deterministic under (config, awareness): the same seed replays the
    same trace."""
    if awareness not in AWARENESS_LEVELS:
        raise ValueError(f"awareness must be one of {AWARENESS_LEVELS}")
    graphs = list(graphs)
    rng = random.Random(config.seed)

    if resume_from:
        state = json.loads(open(resume_from).read())
        current = DesignPoint.from_dict(state["current_design"])
        best_design = DesignPoint.from_dict(state["best_design"])
        trace = ExplorationTrace.from_json_dict(state["trace"])
        rng.setstate(_rng_state_from_json(state["rng_state"]))
        temperature = state["temperature"]
        resumed_floor = state["floor"]
        resumed_stagnant = state["stagnant"]
        k = state["k"]
        start_iter = state["iteration"]
        awareness = state["awareness"]
    else:
        current = base_design(graphs, db)
        best_design = current
        trace = ExplorationTrace(seed=config.seed, awareness=awareness)
        temperature = None
        k = 1
        start_iter = 0

    cur_result = simulate(current, graphs, db)
    cur_values = MetricValues.from_result(cur_result)
    cur_dist = distance_to_budget(cur_values, budget)

    best_result = simulate(best_design, graphs, db) if resume_from else cur_result
    best_values = MetricValues.from_result(best_result)
    best_dist = distance_to_budget(best_values, budget)

    if temperature is None:
        temperature = config.initial_temperature or max(0.1 * cur_dist, 1e-9)
        floor = config.temperature_floor * temperature
        stagnant = 0
    else:
        floor = resumed_floor
        stagnant = resumed_stagnant

    converged = meets_budget(cur_values, budget)
    iteration = start_iter

    while iteration < config.max_iterations and not converged:
        metric, task, block, used_reasoning = _select_target(
            awareness, cur_result, cur_values, budget, current, graphs, db, rng, k, config)

        cands = []
        for _ in range(config.neighbors):
            got = _propose(awareness, metric, task, block, current, graphs, db, rng, config)
            if got is None:
                continue
            move, design = got
            result = simulate(design, graphs, db)
            values = MetricValues.from_result(result)
            cands.append((distance_to_budget(values, budget), move, design, result, values))

        improved = False
        accepted = False
        move_type = move_detail = high = low = ""
        cand_dists: tuple[float, ...] = ()

        if cands:
            cands.sort(key=lambda c: c[0])
            cand_dists = tuple(c[0] for c in cands)
            dist, move, design, result, values = cands[0]
            delta = dist - cur_dist
            if delta < 0:
                accepted = True
            elif temperature > 0:
                accepted = rng.random() < math.exp(-delta / temperature)
            if accepted:
                current, cur_result, cur_values, cur_dist = design, result, values, dist
                improved = delta < 0
            for cdist, cmove, cdesign, cresult, cvalues in cands:
                if cdist < best_dist:
                    best_dist, best_design = cdist, cdesign
                    best_result, best_values = cresult, cvalues
            move_type = move.kind
            move_detail = move.describe()
            high = _HIGH_LEVEL[move.kind]
            low = _low_level(move)
            block_for_record = _move_block(move) if block is None else block
        else:
            block_for_record = block or ""

        kind_class = (_kind_class(current, block_for_record)
                      if block_for_record in current.topology.blocks else "")
        trace.append(IterationRecord(
            iteration=iteration,
            metric=metric,
            workload=task[0] if task else "",
            task="/".join(task) if task else "",
            block=block_for_record or "",
            move_type=move_type,
            move_detail=move_detail,
            high_level=high,
            low_level=low,
            bottleneck_kind=("computation" if kind_class == "pe"
                             else "communication" if kind_class else ""),
            used_move_reasoning=used_reasoning,
            candidate_distances=cand_dists,
            accepted=accepted,
            accepted_distance=cur_dist,
            best_distance=best_dist,
            temperature=temperature,
        ))

        if improved:
            k, stagnant = 1, 0
        else:
            k += 1
            stagnant += 1
            if stagnant >= config.restart_after and best_dist < cur_dist:
                # long dry spell on a worse-than-best design: resume the
                # search from the best one seen so far
                current, cur_result = best_design, best_result
                cur_values, cur_dist = best_values, best_dist
                k, stagnant = 1, 0
        temperature = max(temperature * config.cooling, floor)
        iteration += 1
        converged = meets_budget(cur_values, budget)

        if (config.checkpoint_path and config.checkpoint_every
                and iteration % config.checkpoint_every == 0):
            trace.checkpoints.append(iteration)
            _write_checkpoint(config.checkpoint_path, iteration, temperature,
                              floor, stagnant, k, rng, current, best_design,
                              trace, awareness)

    return AnnealOutcome(
        best_design=best_design, best_result=best_result, best_values=best_values,
        best_distance=best_dist, final_design=current, trace=trace,
        converged=converged, iterations=iteration,
    )


def _select_target(awareness, cur_result, cur_values, budget, current, graphs,
                   db, rng, k, config):
    try:
        metric = select_metric(cur_values, budget, rng, config.epsilon)
    except AllMetricsMetError:
        metric = "latency"

    if awareness == "sa":
        everything = sorted(key for g in graphs for key in g.task_keys())
        task = rng.choice(everything) if everything else None
        return metric, task, None, False

    try:
        task, block = select_task_block(cur_result, metric, current, graphs, budget, k)
    except ExhaustedCandidatesError:
        task, block = select_task_block(cur_result, metric, current, graphs, budget, 1)
    if awareness == "task":
        return metric, task, None, False
    return metric, task, block, awareness == "full"


def _propose(awareness, metric, task, block, current, graphs, db, rng, config):
    try:
        if awareness == "full":
            return select_move(metric, task, block, current, graphs, db, rng,
                               config.move_weights)
        if awareness == "taskblock":
            return random_feasible_move(current, graphs, db, rng, task=task, block=block)
        if awareness == "task":
            # the bottleneck task is pinned; the move and its block stay
            # random within that task's neighborhood
            return random_feasible_move(current, graphs, db, rng, task=task)
        return random_feasible_move(current, graphs, db, rng)
    except NoApplicableMoveError:
        try:
            return random_feasible_move(current, graphs, db, rng)
        except NoApplicableMoveError:
            return None


def naive_sa_baseline(graphs, budget: Budget, db: IpDatabase, config: ExplorerConfig,
                      level: str = "sa") -> AnnealOutcome:
    """The awareness ladder: level "full" reproduces ``anneal`` bit-exactly
    under the same seed; "sa" is the unguided annealer."""
    return anneal(graphs, budget, db, config, awareness=level)


# -- replay / checkpointing ------------------------------------------------------------

def _rng_state_to_json(rng: random.Random):
    version, internal, gauss = rng.getstate()
    return [version, list(internal), gauss]


def _rng_state_from_json(doc):
    version, internal, gauss = doc
    return (version, tuple(internal), gauss)


def _write_checkpoint(path, iteration, temperature, floor, stagnant, k, rng,
                      current, best, trace, awareness):
    state = {
        "iteration": iteration,
        "temperature": temperature,
        "floor": floor,
        "stagnant": stagnant,
        "k": k,
        "rng_state": _rng_state_to_json(rng),
        "current_design": current.to_dict(),
        "best_design": best.to_dict(),
        "trace": trace.to_json_dict(),
        "awareness": awareness,
    }
    with open(path, "w") as fh:
        json.dump(state, fh)


# -- trace analytics --------------------------------------------------------------------

CODESIGN_VECTORS = ("metric", "workload", "high_level", "low_level", "bound")


def analyze_codesign(trace: ExplorationTrace) -> dict:
    """Per-vector focus-switch rate and the mean distance improvement earned
    right after a switch."""
    if not trace.records:
        raise EmptyTraceError("cannot analyze an empty trace")
    series = {
        "metric": [r.metric for r in trace.records],
        "workload": [r.workload for r in trace.records],
        "high_level": [r.high_level for r in trace.records],
        "low_level": [r.low_level for r in trace.records],
        "bound": [r.bottleneck_kind for r in trace.records],
    }
    distances = [r.accepted_distance for r in trace.records]
    n = len(trace.records)
    report = {}
    for vector, values in series.items():
        switches = [i for i in range(1, n) if values[i] != values[i - 1]]
        rate = len(switches) / (n - 1) if n > 1 else 0.0
        gains = [distances[i - 1] - distances[i] for i in switches]
        report[vector] = {
            "deployment_rate": rate,
            "convergence_attribution": sum(gains) / len(gains) if gains else 0.0,
        }
    return report


__all__ = [
    "AWARENESS_LEVELS",
    "AnnealOutcome",
    "DEFAULT_MOVE_WEIGHTS",
    "ExplorationTrace",
    "ExplorerConfig",
    "IterationRecord",
    "TRACE_CSV_COLUMNS",
    "analyze_codesign",
    "anneal",
    "candidate_move_types",
    "invert_move",
    "move_from_dict",
    "move_to_dict",
    "naive_sa_baseline",
    "select_metric",
    "select_move",
    "select_task_block",
]
