"""Phase-driven system simulation.

Time advances in phases: the longest interval during which the set of running
tasks, and therefore every rate and bottleneck, stays constant.  Each phase
ends when the fastest running task completes; all progress is advanced by the
phase duration, finished tasks release their dependents, and the next phase
begins with rates re-evaluated for the new running set.

A task's compute, read and write streams progress concurrently; the task
finishes when its slowest resource does.  Scheduling is first-ready
first-served with ties broken by (workload, task id).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .database import IpDatabase
from .errors import (
    ConservationError,
    InvalidDesignError,
    NoRunningTaskError,
    ZeroRateError,
)
from .hardware import DesignPoint, validate_design
from .rates import Rates, SimContext, compute_rates
from .workload import TaskKey

#: residues below this relative size snap to zero when a resource drains
_SNAP_REL = 1e-12

CONSERVATION_REL_TOL = 1e-9


@dataclass
class PhaseRecord:
    index: int
    duration: float
    running: tuple[TaskKey, ...]
    busy_pes: tuple[str, ...]
    bottleneck: dict[TaskKey, str]   # task -> charged block id
    rates: dict[TaskKey, dict[str, float]] = field(default_factory=dict)


@dataclass
class SimResult:
    workload_latency: dict[str, float]
    makespan: float
    energy_j: float
    power_w: float
    area_mm2: float
    busy_time: dict[str, float]
    bottleneck_by_kind: dict[str, float]
    task_bottleneck: dict[TaskKey, dict[str, float]]
    task_active_time: dict[TaskKey, float]
    task_finish: dict[TaskKey, float]
    block_energy: dict[str, float]
    block_area: dict[str, float]
    block_task_energy: dict[tuple[str, TaskKey], float]
    block_task_work: dict[tuple[str, TaskKey], float]
    processed_ops: dict[TaskKey, float]
    processed_bytes: dict[TaskKey, float]
    phases: list[PhaseRecord]

    def to_json_dict(self) -> dict:
        return {
            "workload_latencies_s": dict(sorted(self.workload_latency.items())),
            "power_w": self.power_w,
            "area_mm2": self.area_mm2,
            "energy_j": self.energy_j,
            "phases": [
                {
                    "index": p.index,
                    "duration_s": p.duration,
                    "running": ["/".join(t) for t in p.running],
                    "busy_pes": list(p.busy_pes),
                    "bottleneck": {"/".join(t): b for t, b in sorted(p.bottleneck.items())},
                }
                for p in self.phases
            ],
            "bottleneck_histogram": dict(sorted(self.bottleneck_by_kind.items())),
            "makespan_s": self.makespan,
            "busy_time_s": dict(sorted(self.busy_time.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def completion_time(remaining: dict[str, float], rates: dict[str, float]) -> float:
    """Time until the slowest resource of one task finishes.

    ``remaining`` and ``rates`` are keyed by resource label; drained resources
    are excluded from the maximum.
    """
    worst = 0.0
    for label, rem in remaining.items():
        if rem <= 0.0:
            continue
        rate = rates.get(label, 0.0)
        if rate <= 0.0:
            raise ZeroRateError(f"resource {label!r} starved with {rem} remaining")
        worst = max(worst, rem / rate)
    return worst


def phase_duration(completion_times) -> float:
    """A phase lasts until the fastest running task completes."""
    times = list(completion_times)
    if not times:
        raise NoRunningTaskError("no running task to derive a phase from")
    return min(times)


class _TaskState:
    __slots__ = ("compute_left", "flow_left", "pending_preds")

    def __init__(self, ctx: SimContext, key: TaskKey):
        self.compute_left = ctx.f_of[key]
        self.flow_left = {(r.key, r.direction): r.bytes for r in ctx.flows_of[key]}
        self.pending_preds = len(ctx.preds[key])

    def done(self) -> bool:
        return self.compute_left <= 0.0 and all(v <= 0.0 for v in self.flow_left.values())


def simulate(design: DesignPoint, graphs, db: IpDatabase, *,
             validate: bool = True, keep_rates: bool = False) -> SimResult:
    """Run all workloads to completion on a design.

    Pure in (design, workloads, database); identical inputs produce a
    bit-identical result, so candidate designs may be evaluated concurrently.
    """
    graphs = list(graphs)
    if validate:
        violations = validate_design(design, graphs, db)
        if violations:
            raise InvalidDesignError(violations)

    ctx = SimContext(design, graphs, db)
    states = {key: _TaskState(ctx, key) for key in ctx.task_keys}

    ready: list[TaskKey] = sorted(k for k in ctx.task_keys if states[k].pending_preds == 0)
    running: list[TaskKey] = []
    finish: dict[TaskKey, float] = {}
    active: dict[TaskKey, float] = {k: 0.0 for k in ctx.task_keys}

    busy_time: dict[str, float] = {}
    task_bottleneck: dict[TaskKey, dict[str, float]] = {k: {} for k in ctx.task_keys}
    kind_time: dict[str, float] = {}
    work: dict[tuple[str, TaskKey], float] = {}
    ops_done: dict[TaskKey, float] = {k: 0.0 for k in ctx.task_keys}
    bytes_done: dict[TaskKey, float] = {k: 0.0 for k in ctx.task_keys}

    phases: list[PhaseRecord] = []
    now = 0.0
    n_done = 0
    total = len(ctx.task_keys)
    blocks = design.topology.blocks

    def retire(key: TaskKey, at: float):
        nonlocal n_done
        finish[key] = at
        n_done += 1
        for succ in ctx.succs[key]:
            states[succ].pending_preds -= 1
            if states[succ].pending_preds == 0:
                ready.append(succ)

    while n_done < total:
        if ready:
            ready.sort()
            running.extend(ready)
            running.sort()
            ready.clear()
        if not running:
            raise NoRunningTaskError("deadlock: tasks remain but none can run")

        # zero-work tasks complete instantly without opening a phase
        instant = [k for k in running if states[k].done()]
        if instant:
            for k in instant:
                retire(k, now)
            running = [k for k in running if k not in set(instant)]
            continue

        rates = compute_rates(ctx, running)
        completions: dict[TaskKey, float] = {}
        argmax: dict[TaskKey, tuple[str, object]] = {}
        for key in running:
            st = states[key]
            best_t = 0.0
            best = ("compute", None)
            if st.compute_left > 0.0:
                rate = rates.compute[key]
                if rate <= 0.0:
                    raise ZeroRateError(f"task {key} compute starved")
                best_t = st.compute_left / rate
            for res in ctx.flows_of[key]:
                rid = (res.key, res.direction)
                rem = st.flow_left[rid]
                if rem <= 0.0:
                    continue
                rate = rates.flow[rid]
                if rate <= 0.0:
                    raise ZeroRateError(f"flow {rid} starved")
                t = rem / rate
                if t > best_t:   # ties keep the PE as the bottleneck
                    best_t = t
                    best = ("flow", res)
            completions[key] = best_t
            argmax[key] = best

        duration = phase_duration(completions.values())

        busy_blocks: set[str] = set()
        busy_pes: set[str] = set()
        bottleneck: dict[TaskKey, str] = {}
        phase_rates: dict[TaskKey, dict[str, float]] = {}

        for key in running:
            st = states[key]
            if st.compute_left > 0.0:
                step = rates.compute[key] * duration
                if st.compute_left - step <= _SNAP_REL * max(ctx.f_of[key], 1.0):
                    step = st.compute_left
                st.compute_left -= step
                pe = ctx.pe_of[key]
                work[(pe, key)] = work.get((pe, key), 0.0) + step
                ops_done[key] += step
                busy_blocks.add(pe)
                busy_pes.add(pe)
            for res in ctx.flows_of[key]:
                rid = (res.key, res.direction)
                rem = st.flow_left[rid]
                if rem <= 0.0:
                    continue
                step = rates.flow[rid] * duration
                if rem - step <= _SNAP_REL * max(res.bytes, 1.0):
                    step = rem
                st.flow_left[rid] = rem - step
                bytes_done[key] += step
                for bid in res.route + (res.mem,):
                    work[(bid, key)] = work.get((bid, key), 0.0) + step
                    busy_blocks.add(bid)

            kind, payload = argmax[key]
            if kind == "compute":
                charged = ctx.pe_of[key]
            else:
                charged = _binding_block(ctx, rates, payload)
            bottleneck[key] = charged
            task_bottleneck[key][charged] = task_bottleneck[key].get(charged, 0.0) + duration
            kname = blocks[charged].kind.value
            kind_time[kname] = kind_time.get(kname, 0.0) + duration
            active[key] += duration

            if keep_rates:
                entry = {"compute": rates.compute[key]}
                for res in ctx.flows_of[key]:
                    rid = (res.key, res.direction)
                    entry[f"{res.direction}:{'/'.join(res.key)}"] = rates.flow[rid]
                phase_rates[key] = entry

        for bid in busy_blocks:
            busy_time[bid] = busy_time.get(bid, 0.0) + duration

        now += duration
        phases.append(PhaseRecord(
            index=len(phases), duration=duration, running=tuple(running),
            busy_pes=tuple(sorted(busy_pes)), bottleneck=bottleneck,
            rates=phase_rates,
        ))

        still_running = []
        for key in running:
            if states[key].done():
                retire(key, now)
            else:
                still_running.append(key)
        running = still_running

    _check_conservation(ctx, ops_done, bytes_done)

    energy, block_energy, block_task_energy, area, block_area = _energy_area(
        ctx, design, db, work, now)
    power = energy / now if now > 0 else sum(
        _leakage(design, db, bid) for bid in sorted(design.topology.blocks))

    latency = {g.name: 0.0 for g in graphs}
    for (wl, tid), t in finish.items():
        latency[wl] = max(latency[wl], t)

    return SimResult(
        workload_latency=latency,
        makespan=now,
        energy_j=energy,
        power_w=power,
        area_mm2=area,
        busy_time=busy_time,
        bottleneck_by_kind=kind_time,
        task_bottleneck=task_bottleneck,
        task_active_time=active,
        task_finish=finish,
        block_energy=block_energy,
        block_area=block_area,
        block_task_energy=block_task_energy,
        block_task_work=work,
        processed_ops=ops_done,
        processed_bytes=bytes_done,
        phases=phases,
    )


def _binding_block(ctx: SimContext, rates: Rates, res) -> str:
    """The route component whose allocation pins a flow's effective rate.

    Ties resolve to the earliest component in route order, memory last.
    """
    effective = rates.flow[(res.key, res.direction)]
    for chan in ctx.channels_of(res):
        if rates.allocation(chan, res.task) <= effective * (1 + 1e-12):
            return chan[1]
    return res.mem


def _energy_area(ctx: SimContext, design: DesignPoint, db: IpDatabase,
                 work: dict, makespan: float):
    # canonical (sorted) summation order: totals stay bit-identical no matter
    # how the design's dicts were assembled
    blocks = design.topology.blocks
    block_energy: dict[str, float] = {}
    block_task_energy: dict[tuple[str, TaskKey], float] = {}
    block_area: dict[str, float] = {}

    for (bid, key) in sorted(work):
        amount = work[(bid, key)]
        blk = blocks[bid]
        if blk.kind.is_pe:
            coef = ctx.e_op[key]
        else:
            coef = ctx.e_byte[bid]
        e = coef * amount
        block_task_energy[(bid, key)] = block_task_energy.get((bid, key), 0.0) + e
        block_energy[bid] = block_energy.get(bid, 0.0) + e

    for bid in sorted(blocks):
        leak = _leakage(design, db, bid)
        block_energy[bid] = block_energy.get(bid, 0.0) + leak * makespan
        block_area[bid] = _area(design, db, bid)

    energy = sum(block_energy[k] for k in sorted(block_energy))
    area = sum(block_area[k] for k in sorted(block_area))
    return energy, block_energy, block_task_energy, area, block_area


def _leakage(design: DesignPoint, db: IpDatabase, bid: str) -> float:
    blk = design.topology.blocks[bid]
    if blk.kind.value == "pe_gpp":
        return db.gpp_entry(blk.freq_mhz).leak_w
    if blk.kind.value == "pe_acc":
        return sum(db.acc_entry(t[1], blk.unroll).leak_w for t in design.tasks_on(bid))
    if blk.kind.is_noc:
        return db.noc_entry(blk.freq_mhz, blk.bus_width_b).leak_w
    return db.mem_entry(blk.kind.mem_kind, blk.freq_mhz, blk.bus_width_b).leak_w


def _area(design: DesignPoint, db: IpDatabase, bid: str) -> float:
    blk = design.topology.blocks[bid]
    if blk.kind.value == "pe_gpp":
        return db.gpp_entry(blk.freq_mhz).area_mm2
    if blk.kind.value == "pe_acc":
        return sum(db.acc_entry(t[1], blk.unroll).area_mm2 for t in design.tasks_on(bid))
    if blk.kind.is_noc:
        return db.noc_entry(blk.freq_mhz, blk.bus_width_b).area_mm2
    return db.mem_entry(blk.kind.mem_kind, blk.freq_mhz, blk.bus_width_b).area_mm2


def estimate_power_area(design: DesignPoint, result: SimResult,
                        db: IpDatabase) -> tuple[float, float]:
    """System power (energy over makespan; pure leakage for an idle design)
    and total area."""
    area = sum(_area(design, db, bid) for bid in sorted(design.topology.blocks))
    if result.makespan > 0:
        power = result.energy_j / result.makespan
    else:
        power = sum(_leakage(design, db, bid) for bid in sorted(design.topology.blocks))
    return power, area


def _check_conservation(ctx: SimContext, ops_done, bytes_done):
    for key in ctx.task_keys:
        f = ctx.f_of[key]
        if abs(ops_done[key] - f) > CONSERVATION_REL_TOL * max(f, 1.0):
            raise ConservationError(
                f"task {key}: processed {ops_done[key]} ops, declared {f}")
        expect = sum(r.bytes for r in ctx.flows_of[key])
        if abs(bytes_done[key] - expect) > CONSERVATION_REL_TOL * max(expect, 1.0):
            raise ConservationError(
                f"task {key}: moved {bytes_done[key]} bytes, declared {expect}")
