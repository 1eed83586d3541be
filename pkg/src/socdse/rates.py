"""Analytical per-block processing rates under contention.

The sharing laws: a processing element splits its peak rate equally among the
running tasks it hosts (an accelerator's peak is its per-task speedup times
the reference GPP rate at the same frequency).  A NoC arbitrates equally at
the aggregate level (peak bandwidth / running tasks) and each of its links is
shared in proportion to the tasks' burst sizes, as is each memory channel.
Reads and writes travel separate channels, each at full peak bandwidth.  A
flow's effective rate is the minimum allocation along its route: every NoC
crossed (aggregate and link) and the memory endpoint.

Rates depend only on the set of running tasks, never on how much work they
have left, so they are piecewise-constant between task completions.  Both the
phase simulator and the fixed-timestep reference evaluate this same law; only
the time-advance mechanics differ.
"""
from __future__ import annotations

from dataclasses import dataclass

from .database import IpDatabase
from .hardware import BlockKind, DesignPoint
from .workload import FlowKey, TaskKey


@dataclass(frozen=True)
class FlowResource:
    """One byte stream of a task: its route and the channels it occupies."""

    key: FlowKey
    direction: str
    task: TaskKey
    bytes: float
    mem: str
    route: tuple[str, ...]


#: channel identifiers: ("noc", id, dir) aggregate, ("mem", id, dir) endpoint
Channel = tuple[str, str, str]


class SimContext:
    """Immutable per-(design, workloads, database) data shared by evaluators."""

    def __init__(self, design: DesignPoint, graphs, db: IpDatabase):
        self.design = design
        self.db = db
        self.graphs = {g.name: g for g in graphs}

        self.task_keys: tuple[TaskKey, ...] = tuple(
            key for g in graphs for key in g.task_keys()
        )
        self.f_of: dict[TaskKey, float] = {}
        self.burst_of: dict[TaskKey, float] = {}
        self.preds: dict[TaskKey, tuple[TaskKey, ...]] = {}
        self.succs: dict[TaskKey, tuple[TaskKey, ...]] = {}
        for g in graphs:
            for tid, task in g.tasks.items():
                key = (g.name, tid)
                self.f_of[key] = task.f
                self.burst_of[key] = task.burst
                self.preds[key] = tuple((g.name, p) for p in g.predecessors(tid))
                self.succs[key] = tuple((g.name, s) for s in g.successors(tid))

        self.pe_of = dict(design.mapping.task_to_pe)

        # peak compute rate each task would get alone on its PE
        self.pe_solo_rate: dict[TaskKey, float] = {}
        self.e_op: dict[TaskKey, float] = {}
        for key in self.task_keys:
            pe = design.topology.blocks[self.pe_of[key]]
            if pe.kind is BlockKind.PE_GPP:
                entry = db.gpp_entry(pe.freq_mhz)
                self.pe_solo_rate[key] = entry.p_peak_ops_s
                self.e_op[key] = entry.e_op_j
            else:
                entry = db.acc_entry(key[1], pe.unroll)
                self.pe_solo_rate[key] = entry.a_peak * db.gpp_p_peak_at(pe.freq_mhz)
                self.e_op[key] = entry.e_op_j

        self.e_byte: dict[str, float] = {}
        for bid, blk in design.topology.blocks.items():
            if blk.kind.is_noc:
                self.e_byte[bid] = db.noc_entry(blk.freq_mhz, blk.bus_width_b).e_byte_j
            elif blk.kind.is_mem:
                self.e_byte[bid] = db.mem_entry(
                    blk.kind.mem_kind, blk.freq_mhz, blk.bus_width_b).e_byte_j

        # materialize flow resources with their channel lists
        self.flows_of: dict[TaskKey, tuple[FlowResource, ...]] = {k: () for k in self.task_keys}
        grouped: dict[TaskKey, list[FlowResource]] = {k: [] for k in self.task_keys}
        for g in graphs:
            for fl in g.flows():
                mem = design.mapping.edge_to_mem[fl.key]
                route = design.mapping.routes[(fl.key, fl.direction)]
                grouped[fl.task].append(FlowResource(
                    fl.key, fl.direction, fl.task, fl.bytes, mem, route))
        self._channels: dict[tuple[FlowKey, str], tuple[Channel, ...]] = {}
        for key, items in grouped.items():
            items.sort(key=lambda r: (r.direction, r.key))
            self.flows_of[key] = tuple(items)
            for res in items:
                chans = [("noc", nid, res.direction) for nid in res.route]
                chans.append(("mem", res.mem, res.direction))
                self._channels[(res.key, res.direction)] = tuple(chans)

    def channels_of(self, res: FlowResource) -> tuple[Channel, ...]:
        return self._channels[(res.key, res.direction)]


@dataclass
class Rates:
    """Per-task rates for one constant-behavior interval.

    ``share`` holds each task's allocation on every channel it occupies and
    ``multiplicity`` how many of the task's own resources split it; a flow's
    effective rate is the minimum of share/multiplicity along its route.
    """

    compute: dict[TaskKey, float]
    flow: dict[tuple[FlowKey, str], float]
    share: dict[tuple[Channel, TaskKey], float]
    multiplicity: dict[tuple[Channel, TaskKey], int]

    def allocation(self, chan: Channel, task: TaskKey) -> float:
        return self.share[(chan, task)] / self.multiplicity[(chan, task)]


def compute_rates(ctx: SimContext, running) -> Rates:
    """Evaluate the sharing law for a set of running tasks."""
    running = sorted(running)
    blocks = ctx.design.topology.blocks

    pe_load: dict[str, int] = {}
    for key in running:
        pe = ctx.pe_of[key]
        pe_load[pe] = pe_load.get(pe, 0) + 1

    compute = {key: ctx.pe_solo_rate[key] / pe_load[ctx.pe_of[key]] for key in running}

    # channel -> ordered participating tasks; (channel, task) -> resource count
    participants: dict[Channel, list[TaskKey]] = {}
    multiplicity: dict[tuple[Channel, TaskKey], int] = {}
    for key in running:
        for res in ctx.flows_of[key]:
            for chan in ctx.channels_of(res):
                members = participants.setdefault(chan, [])
                if not members or members[-1] != key:
                    members.append(key)
                multiplicity[(chan, key)] = multiplicity.get((chan, key), 0) + 1

    share: dict[tuple[Channel, TaskKey], float] = {}
    for chan, members in participants.items():
        kind, bid, _ = chan
        b_peak = blocks[bid].b_peak
        if kind == "mem":
            total_burst = sum(ctx.burst_of[t] for t in members)
            for t in members:
                share[(chan, t)] = b_peak * ctx.burst_of[t] / total_burst
        else:
            aggregate = b_peak / len(members)
            nlinks = blocks[bid].links
            per_link: dict[int, list[TaskKey]] = {}
            for i, t in enumerate(members):
                per_link.setdefault(i % nlinks, []).append(t)
            for group in per_link.values():
                total_burst = sum(ctx.burst_of[t] for t in group)
                for t in group:
                    link_share = b_peak * ctx.burst_of[t] / total_burst
                    share[(chan, t)] = min(aggregate, link_share)

    flow: dict[tuple[FlowKey, str], float] = {}
    for key in running:
        for res in ctx.flows_of[key]:
            rate = min(
                share[(chan, key)] / multiplicity[(chan, key)]
                for chan in ctx.channels_of(res)
            )
            flow[(res.key, res.direction)] = rate
    return Rates(compute=compute, flow=flow, share=share, multiplicity=multiplicity)


def block_rates(design: DesignPoint, graphs, db: IpDatabase, running) -> dict:
    """Readable per-(task, block) rate view for a running task set.

    Returns ``{task: {block: {channel: rate}}}`` with channel one of
    "compute", "read" or "write"; data rates are the task's allocation on
    that block (before taking the route-wide minimum).
    """
    ctx = SimContext(design, graphs, db)
    running = sorted(running)
    rates = compute_rates(ctx, running)

    blocks = ctx.design.topology.blocks
    participants: dict[Channel, list[TaskKey]] = {}
    for key in running:
        for res in ctx.flows_of[key]:
            for chan in ctx.channels_of(res):
                members = participants.setdefault(chan, [])
                if not members or members[-1] != key:
                    members.append(key)

    out: dict[TaskKey, dict[str, dict[str, float]]] = {}
    for key in running:
        out[key] = {ctx.pe_of[key]: {"compute": rates.compute[key]}}
    for chan, members in participants.items():
        kind, bid, direction = chan
        b_peak = blocks[bid].b_peak
        if kind == "mem":
            total_burst = sum(ctx.burst_of[t] for t in members)
            for t in members:
                out[t].setdefault(bid, {})[direction] = (
                    b_peak * ctx.burst_of[t] / total_burst)
        else:
            aggregate = b_peak / len(members)
            nlinks = blocks[bid].links
            per_link: dict[int, list[TaskKey]] = {}
            for i, t in enumerate(members):
                per_link.setdefault(i % nlinks, []).append(t)
            for group in per_link.values():
                total_burst = sum(ctx.burst_of[t] for t in group)
                for t in group:
                    link_share = b_peak * ctx.burst_of[t] / total_burst
                    out[t].setdefault(bid, {})[direction] = min(aggregate, link_share)
    return out
