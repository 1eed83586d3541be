"""Task dependency graphs with work/operational-intensity attributes.

A workload is a DAG of tasks.  Each task carries its computational work ``f``
(operations), loop-level parallelism ``llp``, a communication burst size, and
optionally read/write operational intensities (ops per byte).  Edges carry the
bytes moved for that dependency.  Byte volumes for simulation come from the
edges when a task has any; intensities fill in the boundary traffic of source
and sink tasks (explicit edge bytes win over derived values).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from statistics import fmean

from .errors import (
    CycleError,
    DanglingEdgeError,
    EmptyGraphError,
    InvalidSpecError,
    SchemaError,
)

DEFAULT_BURST_BYTES = 64.0

#: placeholder endpoint for boundary (off-graph) traffic of source/sink tasks
IO_NODE = "__io__"

#: (workload name, task id)
TaskKey = tuple[str, str]
#: (workload name, producer id, consumer id); IO_NODE marks boundary traffic
FlowKey = tuple[str, str, str]

_NAME_BAD_CHARS = ("/", "\n")


def _check_name(value, what: str) -> str:
    if not isinstance(value, str) or not value or value == IO_NODE:
        raise SchemaError(f"{what} must be a non-empty string, got {value!r}")
    if any(c in value for c in _NAME_BAD_CHARS):
        raise SchemaError(f"{what} {value!r} contains a forbidden character")
    return value


def _check_number(value, what: str, minimum: float | None = None,
                  strict: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{what} must be a number, got {value!r}")
    v = float(value)
    if minimum is not None and (v < minimum or (strict and v == minimum)):
        bound = ">" if strict else ">="
        raise SchemaError(f"{what} must be {bound} {minimum}, got {v}")
    return v


@dataclass(frozen=True)
class Task:
    """One schedulable unit of computation."""

    id: str
    f: float                       # work in operations
    llp: float = 1.0               # avg independent loop iterations, >= 1
    i_read: float | None = None    # ops/byte, boundary read traffic
    i_write: float | None = None   # ops/byte, boundary write traffic
    burst: float = DEFAULT_BURST_BYTES

    def __post_init__(self):
        _check_name(self.id, "task id")
        _check_number(self.f, f"task {self.id} f", minimum=0.0)
        _check_number(self.llp, f"task {self.id} llp", minimum=1.0)
        _check_number(self.burst, f"task {self.id} burst", minimum=0.0, strict=True)
        for label, inten in (("i_read", self.i_read), ("i_write", self.i_write)):
            if inten is not None:
                _check_number(inten, f"task {self.id} {label}", minimum=0.0, strict=True)


@dataclass(frozen=True)
class DataEdge:
    """A dependency that moves ``bytes`` from ``src`` to ``dst``."""

    src: str
    dst: str
    bytes: float

    def __post_init__(self):
        _check_name(self.src, "edge src")
        _check_name(self.dst, "edge dst")
        if self.src == self.dst:
            raise SchemaError(f"edge {self.src}->{self.dst} is a self loop")
        _check_number(self.bytes, f"edge {self.src}->{self.dst} bytes", minimum=0.0)


@dataclass(frozen=True)
class Flow:
    """One directed byte stream a task exchanges with a memory."""

    key: FlowKey
    direction: str      # "read" | "write"
    task: TaskKey
    bytes: float


@dataclass(frozen=True)
class WorkloadCharacteristics:
    avg_f: float
    avg_i_read: float
    avg_i_write: float
    avg_data_movement: float
    avg_llp: float
    talp: float


class TaskGraph:
    """A named, validated task DAG.

    Immutable after construction; shared freely across concurrent simulator
    evaluations.
    """

    def __init__(self, name: str, tasks, edges):
        self.name = _check_name(name, "workload name")
        self.tasks: dict[str, Task] = {}
        for t in tasks:
            if t.id in self.tasks:
                raise SchemaError(f"duplicate task id {t.id!r}")
            self.tasks[t.id] = t
        self.edges: tuple[DataEdge, ...] = tuple(edges)

        seen_pairs = set()
        for e in self.edges:
            if e.src not in self.tasks:
                raise DanglingEdgeError(f"edge source {e.src!r} is not a task")
            if e.dst not in self.tasks:
                raise DanglingEdgeError(f"edge target {e.dst!r} is not a task")
            if (e.src, e.dst) in seen_pairs:
                raise SchemaError(f"duplicate edge {e.src}->{e.dst}")
            seen_pairs.add((e.src, e.dst))

        self._succ: dict[str, list[str]] = {tid: [] for tid in self.tasks}
        self._pred: dict[str, list[str]] = {tid: [] for tid in self.tasks}
        for e in self.edges:
            self._succ[e.src].append(e.dst)
            self._pred[e.dst].append(e.src)
        for tid in self.tasks:
            self._succ[tid].sort()
            self._pred[tid].sort()

        self._topo = self._toposort()
        self._descendants = self._compute_descendants()

    # -- structure -----------------------------------------------------------

    def _toposort(self) -> tuple[str, ...]:
        indeg = {tid: len(self._pred[tid]) for tid in self.tasks}
        ready = sorted(tid for tid, d in indeg.items() if d == 0)
        order = []
        while ready:
            tid = ready.pop(0)
            order.append(tid)
            inserted = False
            for nxt in self._succ[tid]:
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    ready.append(nxt)
                    inserted = True
            if inserted:
                ready.sort()
        if len(order) != len(self.tasks):
            pending = sorted(tid for tid, d in indeg.items() if d > 0)
            raise CycleError(f"dependency cycle through {pending}")
        return tuple(order)

    def _compute_descendants(self) -> dict[str, frozenset[str]]:
        desc: dict[str, set[str]] = {}
        for tid in reversed(self._topo):
            acc: set[str] = set()
            for nxt in self._succ[tid]:
                acc.add(nxt)
                acc.update(desc[nxt])
            desc[tid] = acc
        return {tid: frozenset(s) for tid, s in desc.items()}

    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    def predecessors(self, task_id: str) -> tuple[str, ...]:
        return tuple(self._pred[task_id])

    def successors(self, task_id: str) -> tuple[str, ...]:
        return tuple(self._succ[task_id])

    def is_comparable(self, a: str, b: str) -> bool:
        """True when a directed path orders the two tasks."""
        return b in self._descendants[a] or a in self._descendants[b]

    def incomparable_pair_count(self) -> int:
        n = len(self.tasks)
        comparable = sum(len(s) for s in self._descendants.values())
        return n * (n - 1) // 2 - comparable

    def task_keys(self) -> tuple[TaskKey, ...]:
        return tuple((self.name, tid) for tid in self._topo)

    # -- byte volumes ----------------------------------------------------------

    def read_bytes(self, task_id: str) -> float:
        incoming = [e for e in self.edges if e.dst == task_id]
        if incoming:
            return sum(e.bytes for e in incoming)
        t = self.tasks[task_id]
        return t.f / t.i_read if t.i_read else 0.0

    def write_bytes(self, task_id: str) -> float:
        outgoing = [e for e in self.edges if e.src == task_id]
        if outgoing:
            return sum(e.bytes for e in outgoing)
        t = self.tasks[task_id]
        return t.f / t.i_write if t.i_write else 0.0

    def flows(self) -> tuple[Flow, ...]:
        """Every byte stream the workload pushes through the memory system.

        Each edge produces a write flow (producer side) and a read flow
        (consumer side) of the edge's bytes.  Tasks without incoming
        (outgoing) edges contribute boundary flows derived from their
        intensities.  Zero-byte streams are dropped.
        """
        out: list[Flow] = []
        for tid in self._topo:
            t = self.tasks[tid]
            if not self._pred[tid]:
                if t.i_read and t.f > 0:
                    out.append(Flow((self.name, IO_NODE, tid), "read",
                                    (self.name, tid), t.f / t.i_read))
            if not self._succ[tid]:
                if t.i_write and t.f > 0:
                    out.append(Flow((self.name, tid, IO_NODE), "write",
                                    (self.name, tid), t.f / t.i_write))
        for e in self.edges:
            if e.bytes > 0:
                out.append(Flow((self.name, e.src, e.dst), "write",
                                (self.name, e.src), e.bytes))
                out.append(Flow((self.name, e.src, e.dst), "read",
                                (self.name, e.dst), e.bytes))
        return tuple(out)

    # -- characterization -------------------------------------------------------

    def characterize(self) -> WorkloadCharacteristics:
        if not self.tasks:
            raise EmptyGraphError(f"workload {self.name!r} has no tasks")
        reads = [t.i_read for t in self.tasks.values() if t.i_read is not None]
        writes = [t.i_write for t in self.tasks.values() if t.i_write is not None]
        return WorkloadCharacteristics(
            avg_f=fmean(t.f for t in self.tasks.values()),
            avg_i_read=fmean(reads) if reads else 0.0,
            avg_i_write=fmean(writes) if writes else 0.0,
            avg_data_movement=fmean(
                self.read_bytes(tid) + self.write_bytes(tid) for tid in self.tasks
            ),
            avg_llp=compute_llp_avg(self),
            talp=compute_talp(self),
        )

    # -- serialization ----------------------------------------------------------

    def to_document(self) -> dict:
        """Canonical document form: tasks sorted by id, edges by endpoints."""
        tasks = []
        for tid in sorted(self.tasks):
            t = self.tasks[tid]
            doc = {"id": t.id, "f_ops": t.f, "llp": t.llp, "burst": t.burst}
            if t.i_read is not None:
                doc["i_read"] = t.i_read
            if t.i_write is not None:
                doc["i_write"] = t.i_write
            tasks.append(doc)
        edges = [
            {"src": e.src, "dst": e.dst, "bytes": e.bytes}
            for e in sorted(self.edges, key=lambda e: (e.src, e.dst))
        ]
        return {"name": self.name, "tasks": tasks, "edges": edges}


# -- operations ------------------------------------------------------------------

_TASK_FIELDS = {"id", "f_ops", "i_read", "i_write", "llp", "burst"}
_TASK_REQUIRED = {"id", "f_ops", "llp"}
_EDGE_FIELDS = {"src", "dst", "bytes"}


def parse_workload(document) -> TaskGraph:
    """Parse and validate one workload document (JSON text or dict).

    Rejects unknown fields, dependency cycles and edges naming missing tasks.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"workload document is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaError("workload document must be a JSON object")
    unknown = set(document) - {"name", "tasks", "edges"}
    if unknown:
        raise SchemaError(f"unknown workload fields: {sorted(unknown)}")
    for key in ("name", "tasks", "edges"):
        if key not in document:
            raise SchemaError(f"workload document missing field {key!r}")
    if not isinstance(document["tasks"], list) or not isinstance(document["edges"], list):
        raise SchemaError("'tasks' and 'edges' must be arrays")

    tasks = []
    for entry in document["tasks"]:
        if not isinstance(entry, dict):
            raise SchemaError(f"task entry must be an object, got {entry!r}")
        unknown = set(entry) - _TASK_FIELDS
        if unknown:
            raise SchemaError(f"unknown task fields: {sorted(unknown)}")
        missing = _TASK_REQUIRED - set(entry)
        if missing:
            raise SchemaError(f"task entry missing fields: {sorted(missing)}")
        tasks.append(Task(
            id=entry["id"] if isinstance(entry["id"], str) else entry["id"],
            f=_check_number(entry["f_ops"], "f_ops", minimum=0.0),
            llp=_check_number(entry["llp"], "llp", minimum=1.0),
            i_read=(_check_number(entry["i_read"], "i_read", 0.0, strict=True)
                    if "i_read" in entry else None),
            i_write=(_check_number(entry["i_write"], "i_write", 0.0, strict=True)
                     if "i_write" in entry else None),
            burst=(_check_number(entry["burst"], "burst", 0.0, strict=True)
                   if "burst" in entry else DEFAULT_BURST_BYTES),
        ))

    edges = []
    for entry in document["edges"]:
        if not isinstance(entry, dict):
            raise SchemaError(f"edge entry must be an object, got {entry!r}")
        unknown = set(entry) - _EDGE_FIELDS
        if unknown:
            raise SchemaError(f"unknown edge fields: {sorted(unknown)}")
        missing = _EDGE_FIELDS - set(entry)
        if missing:
            raise SchemaError(f"edge entry missing fields: {sorted(missing)}")
        edges.append(DataEdge(
            src=entry["src"], dst=entry["dst"],
            bytes=_check_number(entry["bytes"], "edge bytes", minimum=0.0),
        ))

    return TaskGraph(document["name"], tasks, edges)


def serialize_workload(graph: TaskGraph) -> str:
    return json.dumps(graph.to_document(), indent=2, sort_keys=True)


def compute_talp(graph: TaskGraph) -> float:
    """Task-level parallelism: 1 + number of unordered task pairs that may
    run concurrently (no directed path between them).  A chain scores 1."""
    return 1.0 + graph.incomparable_pair_count()


def compute_llp_avg(graph: TaskGraph) -> float:
    """Arithmetic mean of per-task loop-level parallelism."""
    if not graph.tasks:
        raise EmptyGraphError(f"workload {graph.name!r} has no tasks")
    return fmean(t.llp for t in graph.tasks.values())


# -- synthetic workloads -----------------------------------------------------------

_SHAPES = ("chain", "diamond", "fanout", "random")


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the deterministic workload generator."""

    name: str
    shape: str
    n: int
    seed: int = 0
    f_range: tuple[float, float] = (1e6, 5e7)
    bytes_range: tuple[float, float] = (1e4, 1e6)
    llp_range: tuple[int, int] = (1, 256)
    intensity_range: tuple[float, float] = (4.0, 64.0)
    burst_choices: tuple[float, ...] = (32.0, 64.0, 128.0, 256.0)
    edge_prob: float = 0.3


def synth_workload(spec: SynthSpec) -> TaskGraph:
    """Generate a reproducible workload; the same spec always yields the
    same graph."""
    import random

    if spec.shape not in _SHAPES:
        raise InvalidSpecError(f"unknown shape {spec.shape!r}; pick from {_SHAPES}")
    if spec.n < 1:
        raise InvalidSpecError(f"need at least one task, got n={spec.n}")
    if spec.shape == "diamond" and spec.n < 3:
        raise InvalidSpecError("diamond shape needs n >= 3")
    if spec.shape == "fanout" and spec.n < 2:
        raise InvalidSpecError("fanout shape needs n >= 2")
    for lo, hi in (spec.f_range, spec.bytes_range, spec.llp_range, spec.intensity_range):
        if lo > hi or lo < 0:
            raise InvalidSpecError(f"bad range ({lo}, {hi})")
    if not 0.0 <= spec.edge_prob <= 1.0:
        raise InvalidSpecError(f"edge_prob must be in [0, 1], got {spec.edge_prob}")

    rng = random.Random(spec.seed)
    width = max(2, len(str(spec.n - 1)))
    # workload-qualified ids keep accelerator database keys collision-free
    # when several generated workloads share one experiment
    ids = [f"{spec.name}_t{str(i).zfill(width)}" for i in range(spec.n)]

    tasks = []
    for tid in ids:
        tasks.append(Task(
            id=tid,
            f=rng.uniform(*spec.f_range),
            llp=float(rng.randint(int(spec.llp_range[0]), int(spec.llp_range[1]))),
            i_read=rng.uniform(*spec.intensity_range),
            i_write=rng.uniform(*spec.intensity_range),
            burst=rng.choice(spec.burst_choices),
        ))

    pairs: list[tuple[int, int]] = []
    if spec.shape == "chain":
        pairs = [(i, i + 1) for i in range(spec.n - 1)]
    elif spec.shape == "diamond":
        mids = range(1, spec.n - 1)
        pairs = [(0, m) for m in mids] + [(m, spec.n - 1) for m in mids]
    elif spec.shape == "fanout":
        pairs = [(0, i) for i in range(1, spec.n)]
    else:
        for i in range(spec.n):
            for j in range(i + 1, spec.n):
                if rng.random() < spec.edge_prob:
                    pairs.append((i, j))

    edges = [DataEdge(ids[a], ids[b], rng.uniform(*spec.bytes_range)) for a, b in pairs]
    return TaskGraph(spec.name, tasks, edges)
