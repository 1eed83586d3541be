"""Independent reference evaluation: fixed-timestep simulation and exhaustive
enumeration of small design spaces.

The timestep simulator shares only the per-interval rate law with the phase
simulator; it advances time by a fixed quantum, re-evaluating rates every
step and detecting completions by integration.  Because rates are
piecewise-constant between task completions, its results converge to the
phase simulator's at first order as the step shrinks.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .database import IpDatabase
from .errors import (
    InvalidDesignError,
    NoRunningTaskError,
    SpaceTooLargeError,
    StepBudgetExceededError,
)
from .hardware import (
    BlockKind,
    DesignPoint,
    HardwareBlock,
    Mapping,
    Topology,
    validate_design,
)
from .rates import SimContext, compute_rates
from .simulator import SimResult, _TaskState, _energy_area, _leakage
from .workload import TaskKey


@dataclass(frozen=True)
class OracleConfig:
    dt: float                 # seconds, or fraction of reference makespan
    relative: bool = False
    max_steps: int = 50_000_000


def oracle_simulate(design: DesignPoint, graphs, db: IpDatabase,
                    config: OracleConfig, *, reference_makespan: float | None = None,
                    validate: bool = True) -> SimResult:
    """Advance every running task by a fixed quantum until all complete.

    A resource that would drain mid-step is clamped and its finish recorded at
    the fractional time inside the step; scheduling decisions still happen
    only on step boundaries.
    """
    graphs = list(graphs)
    if validate:
        violations = validate_design(design, graphs, db)
        if violations:
            raise InvalidDesignError(violations)
    if config.relative:
        if reference_makespan is None or reference_makespan <= 0:
            raise ValueError("relative timestep needs a positive reference makespan")
        dt = config.dt * reference_makespan
    else:
        dt = config.dt
    if dt <= 0:
        raise ValueError(f"timestep must be positive, got {dt}")

    ctx = SimContext(design, graphs, db)
    states = {key: _TaskState(ctx, key) for key in ctx.task_keys}

    ready = sorted(k for k in ctx.task_keys if states[k].pending_preds == 0)
    running: list[TaskKey] = []
    finish: dict[TaskKey, float] = {}
    active: dict[TaskKey, float] = {k: 0.0 for k in ctx.task_keys}
    busy_time: dict[str, float] = {}
    task_bottleneck: dict[TaskKey, dict[str, float]] = {k: {} for k in ctx.task_keys}
    kind_time: dict[str, float] = {}
    work: dict[tuple[str, TaskKey], float] = {}
    ops_done: dict[TaskKey, float] = {k: 0.0 for k in ctx.task_keys}
    bytes_done: dict[TaskKey, float] = {k: 0.0 for k in ctx.task_keys}

    blocks = design.topology.blocks
    n_done = 0
    total = len(ctx.task_keys)
    step = 0
    now = 0.0
    makespan = 0.0

    def retire(key: TaskKey, at: float):
        nonlocal n_done, makespan
        finish[key] = at
        makespan = max(makespan, at)
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

        instant = [k for k in running if states[k].done()]
        if instant:
            for k in instant:
                retire(k, now)
            running = [k for k in running if k not in set(instant)]
            continue

        if step >= config.max_steps:
            raise StepBudgetExceededError(
                f"{config.max_steps} steps exceeded with {total - n_done} tasks left")
        step += 1

        rates = compute_rates(ctx, running)

        busy_blocks: set[str] = set()
        finished_now: list[tuple[TaskKey, float]] = []
        for key in running:
            st = states[key]
            slowest_t = 0.0
            slowest_block = None
            task_finish_at = 0.0

            if st.compute_left > 0.0:
                rate = rates.compute[key]
                need = st.compute_left / rate
                slowest_t = need
                slowest_block = ctx.pe_of[key]
                adv = min(st.compute_left, rate * dt)
                st.compute_left -= adv
                pe = ctx.pe_of[key]
                work[(pe, key)] = work.get((pe, key), 0.0) + adv
                ops_done[key] += adv
                busy_blocks.add(pe)
                if st.compute_left <= 0.0:
                    task_finish_at = max(task_finish_at, now + need)

            for res in ctx.flows_of[key]:
                rid = (res.key, res.direction)
                rem = st.flow_left[rid]
                if rem <= 0.0:
                    continue
                rate = rates.flow[rid]
                need = rem / rate
                if need > slowest_t:
                    slowest_t = need
                    for chan in ctx.channels_of(res):
                        if rates.allocation(chan, key) <= rate * (1 + 1e-12):
                            slowest_block = chan[1]
                            break
                    else:
                        slowest_block = res.mem
                adv = min(rem, rate * dt)
                st.flow_left[rid] = rem - adv
                bytes_done[key] += adv
                for bid in res.route + (res.mem,):
                    work[(bid, key)] = work.get((bid, key), 0.0) + adv
                    busy_blocks.add(bid)
                if st.flow_left[rid] <= 0.0:
                    task_finish_at = max(task_finish_at, now + need)

            if slowest_block is not None:
                charged = min(dt, slowest_t)
                task_bottleneck[key][slowest_block] = (
                    task_bottleneck[key].get(slowest_block, 0.0) + charged)
                kname = blocks[slowest_block].kind.value
                kind_time[kname] = kind_time.get(kname, 0.0) + charged
                active[key] += charged

            if st.done():
                finished_now.append((key, min(now + dt, task_finish_at)))

        for bid in busy_blocks:
            busy_time[bid] = busy_time.get(bid, 0.0) + dt

        now += dt
        if finished_now:
            done_set = {k for k, _ in finished_now}
            for key, at in finished_now:
                retire(key, at)
            running = [k for k in running if k not in done_set]

    energy, block_energy, block_task_energy, area, block_area = _energy_area(
        ctx, design, db, work, makespan)
    power = energy / makespan if makespan > 0 else sum(
        _leakage(design, db, bid) for bid in sorted(blocks))

    latency = {g.name: 0.0 for g in graphs}
    for (wl, _), t in finish.items():
        latency[wl] = max(latency[wl], t)

    return SimResult(
        workload_latency=latency, makespan=makespan, energy_j=energy,
        power_w=power, area_mm2=area, busy_time=busy_time,
        bottleneck_by_kind=kind_time, task_bottleneck=task_bottleneck,
        task_active_time=active, task_finish=finish,
        block_energy=block_energy, block_area=block_area,
        block_task_energy=block_task_energy, block_task_work=work,
        processed_ops=ops_done, processed_bytes=bytes_done,
        phases=[],
    )


# -- exhaustive enumeration ---------------------------------------------------------


@dataclass(frozen=True)
class EnumerationBounds:
    """Search-space bounds for the exhaustive optimality reference."""

    max_pe: int = 2
    pe_freqs: tuple[int, ...] = (100, 200, 400, 800)
    noc_freqs: tuple[int, ...] = (100, 200, 400, 800)
    noc_widths: tuple[int, ...] = (32,)
    mem_freqs: tuple[int, ...] = (100, 200, 400, 800)
    mem_widths: tuple[int, ...] = (32,)
    cap: int = 100_000


def _partitions(items: list, max_groups: int):
    """Unordered set partitions of ``items`` into at most ``max_groups``;
    canonical: each group is led by its smallest element."""
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for sub in _partitions(rest, max_groups):
        for i in range(len(sub)):
            yield sub[:i] + [[head] + sub[i]] + sub[i + 1:]
        if len(sub) < max_groups:
            yield [[head]] + sub


def enumerate_space(graphs, bounds: EnumerationBounds, db: IpDatabase):
    """All valid single-NoC, single-memory designs within the bounds.

    Deterministic, duplicate-free (designs identical up to PE renaming appear
    once) and independent of any seed.
    """
    graphs = list(graphs)
    tasks = sorted(key for g in graphs for key in g.task_keys())

    knob_grid = (len(bounds.noc_freqs) * len(bounds.noc_widths)
                 * len(bounds.mem_freqs) * len(bounds.mem_widths))
    total = 0
    for part in _partitions(tasks, bounds.max_pe):
        total += len(bounds.pe_freqs) ** len(part) * knob_grid
        if total > bounds.cap:
            raise SpaceTooLargeError(
                f"over {total} designs exceed the cap {bounds.cap}")

    designs: list[DesignPoint] = []
    seen: set = set()
    for part in _partitions(tasks, bounds.max_pe):
        part = sorted(part)
        for freqs in product(bounds.pe_freqs, repeat=len(part)):
            # unlabeled PEs: keep one representative per (task-set, freq) multiset
            signature_pes = tuple(sorted((f, tuple(g)) for f, g in zip(freqs, part)))
            for nf, nw in product(bounds.noc_freqs, bounds.noc_widths):
                for mf, mw in product(bounds.mem_freqs, bounds.mem_widths):
                    sig = (signature_pes, nf, nw, mf, mw)
                    if sig in seen:
                        continue
                    seen.add(sig)
                    designs.append(_build_enumerated(graphs, part, freqs, nf, nw, mf, mw))
    return designs


def _build_enumerated(graphs, part, freqs, noc_freq, noc_width, mem_freq, mem_width):
    topo = Topology(
        blocks=[
            HardwareBlock("noc_0", BlockKind.NOC, noc_freq, noc_width, links=1),
            HardwareBlock("mem_0", BlockKind.MEM_DRAM, mem_freq, mem_width),
        ],
        links=[("noc_0", "mem_0")],
    )
    mapping = Mapping()
    for i, (group, freq) in enumerate(zip(part, freqs)):
        pid = f"gpp_{i}"
        topo.add_block(HardwareBlock(pid, BlockKind.PE_GPP, freq))
        topo.add_link(pid, "noc_0")
        for key in group:
            mapping.task_to_pe[key] = pid
    for g in graphs:
        for fl in g.flows():
            mapping.edge_to_mem[fl.key] = "mem_0"
            mapping.routes[(fl.key, fl.direction)] = ("noc_0",)
    return DesignPoint(topo, mapping)
