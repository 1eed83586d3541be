"""Hardware model: blocks, topology, task mapping and the mutable design point.

A design is a graph of processing elements, NoCs and memories plus the
assignment of tasks to PEs and of data flows to memories and NoC routes.
Designs are values: the explorer clones one, mutates the clone through a
single move and simulates it, so concurrent candidate evaluations never share
mutable state.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum

from .database import IpDatabase
from .errors import MissingDatabaseEntryError, MissingGppEntryError, UnreachableError
from .workload import Flow, FlowKey, TaskKey

FREQ_LADDER_MHZ = (100, 200, 400, 800)
WIDTH_LADDER_B = (4, 8, 16, 32, 64, 128, 256)


class BlockKind(str, Enum):
    PE_GPP = "pe_gpp"
    PE_ACC = "pe_acc"
    NOC = "noc"
    MEM_DRAM = "mem_dram"
    MEM_SRAM = "mem_sram"

    @property
    def is_pe(self) -> bool:
        return self in (BlockKind.PE_GPP, BlockKind.PE_ACC)

    @property
    def is_mem(self) -> bool:
        return self in (BlockKind.MEM_DRAM, BlockKind.MEM_SRAM)

    @property
    def is_noc(self) -> bool:
        return self is BlockKind.NOC

    @property
    def mem_kind(self) -> str:
        return {BlockKind.MEM_DRAM: "dram", BlockKind.MEM_SRAM: "sram"}[self]


@dataclass
class HardwareBlock:
    id: str
    kind: BlockKind
    freq_mhz: int
    bus_width_b: int | None = None   # NoC/Mem only
    links: int = 1                   # NoC only
    unroll: int = 1                  # accelerator only

    @property
    def b_peak(self) -> float:
        """Peak bandwidth in bytes/s; defined for NoC and memory blocks."""
        return self.freq_mhz * 1e6 * self.bus_width_b

    def clone(self, new_id: str | None = None) -> "HardwareBlock":
        return HardwareBlock(new_id or self.id, self.kind, self.freq_mhz,
                             self.bus_width_b, self.links, self.unroll)

    def knobs(self) -> tuple:
        return (self.kind, self.freq_mhz, self.bus_width_b, self.links, self.unroll)


_LEGAL_LINKS = {
    frozenset({"pe", "noc"}),
    frozenset({"noc"}),          # NoC <-> NoC
    frozenset({"noc", "mem"}),
}


def _link_class(kind: BlockKind) -> str:
    if kind.is_pe:
        return "pe"
    if kind.is_mem:
        return "mem"
    return "noc"


class Topology:
    """Undirected block graph.  All PE/memory traffic crosses at least one NoC."""

    def __init__(self, blocks=(), links=()):
        self.blocks: dict[str, HardwareBlock] = {b.id: b for b in blocks}
        self.links: set[tuple[str, str]] = {tuple(sorted(l)) for l in links}

    def add_block(self, block: HardwareBlock):
        self.blocks[block.id] = block

    def add_link(self, a: str, b: str):
        self.links.add(tuple(sorted((a, b))))

    def remove_block(self, block_id: str):
        del self.blocks[block_id]
        self.links = {l for l in self.links if block_id not in l}

    def has_link(self, a: str, b: str) -> bool:
        return tuple(sorted((a, b))) in self.links

    def neighbors(self, block_id: str) -> tuple[str, ...]:
        out = []
        for a, b in self.links:
            if a == block_id:
                out.append(b)
            elif b == block_id:
                out.append(a)
        return tuple(sorted(out))

    def ids_of(self, predicate) -> tuple[str, ...]:
        return tuple(sorted(bid for bid, blk in self.blocks.items() if predicate(blk.kind)))

    def clone(self) -> "Topology":
        t = Topology()
        t.blocks = {bid: blk.clone() for bid, blk in self.blocks.items()}
        t.links = set(self.links)
        return t


@dataclass
class Mapping:
    """Task-to-PE binding plus per-flow memory assignment and NoC routes.

    Routes are keyed by (flow key, direction) and list the NoC ids crossed
    between the task's PE and the flow's memory.
    """

    task_to_pe: dict[TaskKey, str] = field(default_factory=dict)
    edge_to_mem: dict[FlowKey, str] = field(default_factory=dict)
    routes: dict[tuple[FlowKey, str], tuple[str, ...]] = field(default_factory=dict)

    def clone(self) -> "Mapping":
        return Mapping(dict(self.task_to_pe), dict(self.edge_to_mem), dict(self.routes))


class DesignPoint:
    """One explorable hardware/software configuration."""

    def __init__(self, topology: Topology, mapping: Mapping, provenance=(),
                 next_ordinal: int = 0):
        self.topology = topology
        self.mapping = mapping
        self.provenance: list = list(provenance)
        # monotone ordinal for fresh block ids; serialized so a restored
        # design never reuses a name an earlier clone already consumed
        self.next_ordinal = next_ordinal

    def clone(self) -> "DesignPoint":
        return DesignPoint(self.topology.clone(), self.mapping.clone(),
                           list(self.provenance), self.next_ordinal)

    def fresh_block_id(self, base: str) -> str:
        while True:
            candidate = f"{base}.f{self.next_ordinal}"
            self.next_ordinal += 1
            if candidate not in self.topology.blocks:
                return candidate

    # -- queries -------------------------------------------------------------

    def pes(self) -> tuple[str, ...]:
        return self.topology.ids_of(lambda k: k.is_pe)

    def mems(self) -> tuple[str, ...]:
        return self.topology.ids_of(lambda k: k.is_mem)

    def nocs(self) -> tuple[str, ...]:
        return self.topology.ids_of(lambda k: k.is_noc)

    def tasks_on(self, block_id: str) -> tuple[TaskKey, ...]:
        return tuple(sorted(t for t, b in self.mapping.task_to_pe.items() if b == block_id))

    def flows_on_mem(self, block_id: str) -> tuple[FlowKey, ...]:
        return tuple(sorted(k for k, m in self.mapping.edge_to_mem.items() if m == block_id))

    def tasks_touching(self, block_id: str, graphs) -> tuple[TaskKey, ...]:
        """Tasks hosted by a PE, or whose flows use a memory/NoC."""
        blk = self.topology.blocks[block_id]
        if blk.kind.is_pe:
            return self.tasks_on(block_id)
        flows = _flows_by_key(graphs)
        found = set()
        if blk.kind.is_mem:
            for key in self.flows_on_mem(block_id):
                for fl in flows.get(key, ()):
                    found.add(fl.task)
        else:
            for (key, _), route in self.mapping.routes.items():
                if block_id in route:
                    for fl in flows.get(key, ()):
                        found.add(fl.task)
        return tuple(sorted(found))

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        from .moves import move_to_dict

        return {
            "blocks": [
                {
                    "id": b.id, "kind": b.kind.value, "freq_mhz": b.freq_mhz,
                    "bus_width_b": b.bus_width_b, "links": b.links, "unroll": b.unroll,
                }
                for _, b in sorted(self.topology.blocks.items())
            ],
            "links": sorted(list(l) for l in self.topology.links),
            "task_to_pe": {"/".join(k): v for k, v in sorted(self.mapping.task_to_pe.items())},
            "edge_to_mem": {"/".join(k): v for k, v in sorted(self.mapping.edge_to_mem.items())},
            "routes": {
                "/".join(key) + "#" + direction: list(route)
                for (key, direction), route in sorted(self.mapping.routes.items())
            },
            "provenance": [move_to_dict(m) for m in self.provenance],
            "next_block_ordinal": self.next_ordinal,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DesignPoint":
        from .moves import move_from_dict

        topo = Topology()
        for b in doc["blocks"]:
            topo.add_block(HardwareBlock(
                id=b["id"], kind=BlockKind(b["kind"]), freq_mhz=b["freq_mhz"],
                bus_width_b=b["bus_width_b"], links=b["links"], unroll=b["unroll"],
            ))
        for a, b in doc["links"]:
            topo.add_link(a, b)
        mapping = Mapping(
            task_to_pe={tuple(k.split("/")): v for k, v in doc["task_to_pe"].items()},
            edge_to_mem={tuple(k.split("/")): v for k, v in doc["edge_to_mem"].items()},
            routes={
                (tuple(key.split("#")[0].split("/")), key.split("#")[1]): tuple(route)
                for key, route in doc["routes"].items()
            },
        )
        return cls(topo, mapping, [move_from_dict(m) for m in doc.get("provenance", [])],
                   next_ordinal=doc.get("next_block_ordinal", 0))


def _flows_by_key(graphs) -> dict[FlowKey, list[Flow]]:
    out: dict[FlowKey, list[Flow]] = {}
    for g in graphs:
        for fl in g.flows():
            out.setdefault(fl.key, []).append(fl)
    return out


# -- operations ------------------------------------------------------------------

def base_design(graphs, db: IpDatabase) -> DesignPoint:
    """The minimal starting point: one general-purpose processor, one NoC and
    one DRAM bank, with every task and flow mapped onto them."""
    if not db.gpp:
        raise MissingGppEntryError("cannot build a base design without gpp entries")
    gpp_freq = min(db.gpp)
    if not db.noc:
        raise MissingDatabaseEntryError("database has no noc entries")
    noc_freq, noc_width = min(db.noc)
    dram_keys = [(f, w) for kind, f, w in db.mem if kind == "dram"]
    if not dram_keys:
        raise MissingDatabaseEntryError("database has no dram entries")
    mem_freq, mem_width = min(dram_keys)

    topo = Topology(
        blocks=[
            HardwareBlock("gpp_0", BlockKind.PE_GPP, gpp_freq),
            HardwareBlock("noc_0", BlockKind.NOC, noc_freq, noc_width, links=1),
            HardwareBlock("mem_0", BlockKind.MEM_DRAM, mem_freq, mem_width),
        ],
        links=[("gpp_0", "noc_0"), ("noc_0", "mem_0")],
    )
    mapping = Mapping()
    for g in graphs:
        for key in g.task_keys():
            mapping.task_to_pe[key] = "gpp_0"
        for fl in g.flows():
            mapping.edge_to_mem[fl.key] = "mem_0"
            mapping.routes[(fl.key, fl.direction)] = ("noc_0",)
    return DesignPoint(topo, mapping)


def route(design: DesignPoint, pe_id: str, mem_id: str) -> tuple[str, ...]:
    """Deterministic shortest NoC path between a PE and a memory.

    Equal-length alternatives resolve to the lexicographically smallest
    sequence of NoC ids.
    """
    topo = design.topology
    if pe_id not in topo.blocks or mem_id not in topo.blocks:
        raise UnreachableError(f"unknown endpoint {pe_id!r} or {mem_id!r}")
    goal_nocs = {n for n in topo.neighbors(mem_id) if topo.blocks[n].kind.is_noc}
    heap = []
    for n in topo.neighbors(pe_id):
        if topo.blocks[n].kind.is_noc:
            heapq.heappush(heap, (1, (n,)))
    seen: set[str] = set()
    while heap:
        length, path = heapq.heappop(heap)
        tail = path[-1]
        if tail in seen:
            continue
        seen.add(tail)
        if tail in goal_nocs:
            return path
        for nxt in topo.neighbors(tail):
            if topo.blocks[nxt].kind.is_noc and nxt not in seen:
                heapq.heappush(heap, (length + 1, path + (nxt,)))
    raise UnreachableError(f"no NoC path from {pe_id} to {mem_id}")


def route_for_flow(design: DesignPoint, flow: Flow) -> tuple[str, ...]:
    pe = design.mapping.task_to_pe[flow.task]
    mem = design.mapping.edge_to_mem[flow.key]
    return route(design, pe, mem)


def validate_design(design: DesignPoint, graphs=(), db: IpDatabase | None = None) -> list[str]:
    """Return the list of violated invariants; an empty list means valid."""
    v: list[str] = []
    topo = design.topology

    for bid, blk in sorted(topo.blocks.items()):
        if blk.freq_mhz not in FREQ_LADDER_MHZ:
            v.append(f"block {bid}: frequency {blk.freq_mhz} MHz outside ladder")
        if blk.kind.is_pe:
            if blk.bus_width_b is not None:
                v.append(f"block {bid}: processing elements carry no bus width")
        else:
            if blk.bus_width_b not in WIDTH_LADDER_B:
                v.append(f"block {bid}: bus width {blk.bus_width_b} outside ladder")
        if blk.kind.is_noc and blk.links < 1:
            v.append(f"block {bid}: link count must be >= 1")
        if blk.unroll < 1:
            v.append(f"block {bid}: unroll must be >= 1")

    for a, b in sorted(topo.links):
        if a not in topo.blocks or b not in topo.blocks:
            v.append(f"link {a}-{b}: unknown endpoint")
            continue
        classes = frozenset({_link_class(topo.blocks[a].kind), _link_class(topo.blocks[b].kind)})
        if classes not in _LEGAL_LINKS:
            v.append(f"link {a}-{b}: {'-'.join(sorted(classes))} links are not allowed")

    # every PE must reach at least one memory through NoCs
    mems = set(design.mems())
    for pe in design.pes():
        reached = _noc_reachable(topo, pe)
        if not (reached & mems):
            v.append(f"block {pe}: cannot reach any memory through NoCs")

    mapped = design.mapping.task_to_pe
    flow_groups = _flows_by_key(graphs)
    expected_tasks = {key for g in graphs for key in g.task_keys()}
    for key in sorted(expected_tasks):
        pe = mapped.get(key)
        if pe is None:
            v.append(f"task {'/'.join(key)}: unmapped")
        elif pe not in topo.blocks or not topo.blocks[pe].kind.is_pe:
            v.append(f"task {'/'.join(key)}: mapped to non-PE {pe!r}")
    for key in sorted(mapped):
        if expected_tasks and key not in expected_tasks:
            v.append(f"task {'/'.join(key)}: mapped but not part of any workload")

    shortest_cache: dict[tuple[str, str], int] = {}
    for key, flows in sorted(flow_groups.items()):
        mem = design.mapping.edge_to_mem.get(key)
        if mem is None:
            v.append(f"flow {'/'.join(key)}: no memory assigned")
            continue
        if mem not in topo.blocks or not topo.blocks[mem].kind.is_mem:
            v.append(f"flow {'/'.join(key)}: assigned to non-memory {mem!r}")
            continue
        for fl in flows:
            stored = design.mapping.routes.get((key, fl.direction))
            if stored is None:
                v.append(f"flow {'/'.join(key)} {fl.direction}: no route")
                continue
            pe = mapped.get(fl.task)
            if pe is None:
                continue  # already reported as unmapped
            problem = _check_route(topo, pe, mem, stored, shortest_cache, design)
            if problem:
                v.append(f"flow {'/'.join(key)} {fl.direction}: {problem}")

    if db is not None:
        for bid, blk in sorted(topo.blocks.items()):
            try:
                if blk.kind is BlockKind.PE_GPP:
                    db.gpp_entry(blk.freq_mhz)
                elif blk.kind is BlockKind.PE_ACC:
                    for task in design.tasks_on(bid):
                        db.acc_entry(task[1], blk.unroll)
                elif blk.kind.is_noc:
                    db.noc_entry(blk.freq_mhz, blk.bus_width_b)
                else:
                    db.mem_entry(blk.kind.mem_kind, blk.freq_mhz, blk.bus_width_b)
            except (MissingGppEntryError, MissingDatabaseEntryError) as exc:
                v.append(f"block {bid}: {exc}")

    return v


def _noc_reachable(topo: Topology, start: str) -> set[str]:
    """All blocks reachable from ``start`` crossing only NoC interior nodes."""
    seen = {start}
    frontier = [n for n in topo.neighbors(start) if topo.blocks[n].kind.is_noc]
    reached: set[str] = set()
    while frontier:
        cur = frontier.pop()
        if cur in seen:
            continue
        seen.add(cur)
        for nxt in topo.neighbors(cur):
            if nxt in seen:
                continue
            if topo.blocks[nxt].kind.is_noc:
                frontier.append(nxt)
            else:
                reached.add(nxt)
    return reached


def _check_route(topo, pe, mem, stored, cache, design) -> str | None:
    if not stored:
        return "route is empty"
    if len(set(stored)) != len(stored):
        return "route revisits a block"
    for nid in stored:
        blk = topo.blocks.get(nid)
        if blk is None or not blk.kind.is_noc:
            return f"route element {nid!r} is not a NoC"
    if not topo.has_link(pe, stored[0]):
        return f"route does not start adjacent to {pe}"
    if not topo.has_link(stored[-1], mem):
        return f"route does not end adjacent to {mem}"
    for a, b in zip(stored, stored[1:]):
        if not topo.has_link(a, b):
            return f"route hop {a}-{b} has no link"
    key = (pe, mem)
    if key not in cache:
        try:
            cache[key] = len(route(design, pe, mem))
        except UnreachableError:
            cache[key] = -1
    if cache[key] >= 0 and len(stored) != cache[key]:
        return f"route length {len(stored)} is not shortest ({cache[key]})"
    return None
