"""Incremental design mutations: swap, fork, join, migrate and the fork+swap
shortcut.

Every move is symmetric: applying a move and then its inverse restores a
design with identical simulated behavior (a re-forked block gets a fresh id
but the same knobs, connectivity and load).  Moves that displace state record
what they displaced, so the inverse can restore routes and knobs exactly.

``apply_move`` never mutates its input; it returns a new validated design
whose provenance ends with the fully resolved move.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .database import IpDatabase
from .errors import (
    InfeasibleMoveError,
    MissingDatabaseEntryError,
    MissingGppEntryError,
    NoApplicableMoveError,
    UnreachableError,
)
from .hardware import (
    FREQ_LADDER_MHZ,
    WIDTH_LADDER_B,
    BlockKind,
    DesignPoint,
    route,
    validate_design,
)
from .workload import FlowKey, TaskKey

KNOBS = ("freq", "bus_width", "subtype", "unroll")
DIRECTIONS = ("up", "down")

RouteKey = tuple[FlowKey, str]


@dataclass(frozen=True)
class Swap:
    block: str
    knob: str
    direction: str
    unroll_memo: int | None = None   # accelerator unroll displaced by subtype-down

    @property
    def kind(self) -> str:
        return "swap"

    def describe(self) -> str:
        return f"{self.knob}:{self.direction}"


@dataclass(frozen=True)
class Fork:
    block: str
    tasks: tuple[TaskKey, ...]
    clone_id: str | None = None
    flow_keys: tuple[FlowKey, ...] | None = None   # memory forks: flows to move
    route_keys: tuple[RouteKey, ...] | None = None  # NoC forks: routes to move

    @property
    def kind(self) -> str:
        return "fork"

    def describe(self) -> str:
        return f"split:{len(self.tasks)}_tasks"


@dataclass(frozen=True)
class Join:
    survivor: str
    absorbed: str
    moved_tasks: tuple[TaskKey, ...] | None = None
    moved_flows: tuple[FlowKey, ...] | None = None
    rerouted: tuple[RouteKey, ...] | None = None

    @property
    def kind(self) -> str:
        return "join"

    def describe(self) -> str:
        return f"absorb:{self.absorbed}"


@dataclass(frozen=True)
class Migrate:
    task: TaskKey
    src: str
    dst: str
    routes: tuple[tuple[RouteKey, tuple[str, ...]], ...] | None = None
    prior_routes: tuple[tuple[RouteKey, tuple[str, ...]], ...] | None = None

    @property
    def kind(self) -> str:
        return "migrate"

    def describe(self) -> str:
        return f"{self.src}->{self.dst}"


@dataclass(frozen=True)
class ForkSwap:
    fork: Fork
    swap: Swap

    @property
    def kind(self) -> str:
        return "fork_swap"

    def describe(self) -> str:
        return f"{self.fork.describe()}+{self.swap.describe()}"


@dataclass(frozen=True)
class SwapJoin:
    """Inverse of a fork+swap: undo the knob step, then merge the clone back."""

    swap: Swap
    join: Join

    @property
    def kind(self) -> str:
        return "swap_join"

    def describe(self) -> str:
        return f"{self.swap.describe()}+{self.join.describe()}"


Move = Swap | Fork | Join | Migrate | ForkSwap | SwapJoin

#: development-effort precedence, cheapest first (sampling weights elsewhere)
MOVE_PRECEDENCE = ("join", "migrate", "fork", "swap", "fork_swap")


def _ladder_step(ladder, current, direction):
    try:
        idx = ladder.index(current)
    except ValueError:
        raise InfeasibleMoveError(f"value {current} is off the ladder {ladder}") from None
    idx += 1 if direction == "up" else -1
    if idx < 0 or idx >= len(ladder):
        raise InfeasibleMoveError(f"{current} is at the {direction} end of {ladder}")
    return ladder[idx]


def apply_move(design: DesignPoint, move: Move, graphs, db: IpDatabase,
               *, validate: bool = True) -> DesignPoint:
    """Apply one move to a clone of the design.

    Raises InfeasibleMoveError when the move cannot produce a valid design
    (knob at a ladder boundary, missing database entry, topology would
    disconnect, incompatible destination).
    """
    new = design.clone()
    resolved = _dispatch(new, move, graphs, db)
    if validate:
        violations = validate_design(new, graphs, db)
        if violations:
            raise InfeasibleMoveError(
                f"{move.kind} produced an invalid design: {violations[0]}")
    new.provenance.append(resolved)
    return new


def _dispatch(design, move, graphs, db):
    if isinstance(move, Swap):
        return _apply_swap(design, move, db)
    if isinstance(move, Fork):
        return _apply_fork(design, move)
    if isinstance(move, Join):
        return _apply_join(design, move)
    if isinstance(move, Migrate):
        return _apply_migrate(design, move, graphs, db)
    if isinstance(move, ForkSwap):
        fork = _apply_fork(design, move.fork)
        swap = _apply_swap(design, replace(move.swap, block=fork.clone_id), db)
        return ForkSwap(fork=fork, swap=swap)
    if isinstance(move, SwapJoin):
        swap = _apply_swap(design, move.swap, db)
        join = _apply_join(design, move.join)
        return SwapJoin(swap=swap, join=join)
    raise InfeasibleMoveError(f"unknown move {move!r}")


# -- swap ---------------------------------------------------------------------

def _require_entry(db, blk, tasks=()):
    try:
        if blk.kind is BlockKind.PE_GPP:
            db.gpp_entry(blk.freq_mhz)
        elif blk.kind is BlockKind.PE_ACC:
            for key in tasks:
                db.acc_entry(key[1], blk.unroll)
        elif blk.kind.is_noc:
            db.noc_entry(blk.freq_mhz, blk.bus_width_b)
        else:
            db.mem_entry(blk.kind.mem_kind, blk.freq_mhz, blk.bus_width_b)
    except (MissingDatabaseEntryError, MissingGppEntryError) as exc:
        raise InfeasibleMoveError(str(exc)) from exc


def _apply_swap(design, move: Swap, db) -> Swap:
    blk = design.topology.blocks.get(move.block)
    if blk is None:
        raise InfeasibleMoveError(f"no block {move.block!r}")
    if move.knob not in KNOBS or move.direction not in DIRECTIONS:
        raise InfeasibleMoveError(f"bad swap parameters {move.knob}/{move.direction}")
    hosted = design.tasks_on(move.block) if blk.kind.is_pe else ()
    memo = None

    if move.knob == "freq":
        blk.freq_mhz = _ladder_step(FREQ_LADDER_MHZ, blk.freq_mhz, move.direction)
    elif move.knob == "bus_width":
        if blk.kind.is_pe:
            raise InfeasibleMoveError("processing elements have no bus width knob")
        blk.bus_width_b = _ladder_step(WIDTH_LADDER_B, blk.bus_width_b, move.direction)
    elif move.knob == "subtype":
        if blk.kind.is_noc:
            raise InfeasibleMoveError("NoCs have no subtype knob")
        if blk.kind.is_pe:
            if move.direction == "up":
                if blk.kind is BlockKind.PE_ACC:
                    raise InfeasibleMoveError(f"{move.block} is already specialized")
                blk.kind = BlockKind.PE_ACC
                blk.unroll = move.unroll_memo or 1
            else:
                if blk.kind is BlockKind.PE_GPP:
                    raise InfeasibleMoveError(f"{move.block} is already general-purpose")
                memo = blk.unroll
                blk.kind = BlockKind.PE_GPP
                blk.unroll = 1
        else:
            want = BlockKind.MEM_SRAM if move.direction == "up" else BlockKind.MEM_DRAM
            if blk.kind is want:
                raise InfeasibleMoveError(f"{move.block} is already {want.value}")
            blk.kind = want
    else:  # unroll
        if blk.kind is not BlockKind.PE_ACC:
            raise InfeasibleMoveError("only accelerators have an unroll knob")
        if not hosted:
            raise InfeasibleMoveError("unroll swap on an accelerator with no tasks")
        ladders = [set(db.acc_unrolls(key[1])) for key in hosted]
        common = sorted(set.intersection(*ladders))
        if not common:
            raise InfeasibleMoveError("hosted tasks share no unroll setting")
        blk.unroll = _ladder_step(tuple(common), blk.unroll, move.direction)

    _require_entry(db, blk, hosted)
    return replace(move, unroll_memo=memo if memo is not None else move.unroll_memo)


# -- fork ------------------------------------------------------------------------

def _apply_fork(design, move: Fork) -> Fork:
    topo = design.topology
    blk = topo.blocks.get(move.block)
    if blk is None:
        raise InfeasibleMoveError(f"no block {move.block!r}")
    clone_id = move.clone_id or design.fresh_block_id(move.block)
    if clone_id in topo.blocks:
        raise InfeasibleMoveError(f"clone id {clone_id!r} already exists")
    clone = blk.clone(clone_id)
    topo.add_block(clone)
    for nb in topo.neighbors(move.block):
        topo.add_link(clone_id, nb)

    mapping = design.mapping
    flow_keys = move.flow_keys
    route_keys = move.route_keys

    if blk.kind.is_pe:
        for key in move.tasks:
            if mapping.task_to_pe.get(key) != move.block:
                raise InfeasibleMoveError(f"task {key} is not on {move.block}")
            mapping.task_to_pe[key] = clone_id
        # identical connectivity: existing routes remain shortest and valid
    elif blk.kind.is_mem:
        if flow_keys is None:
            tasks = set(move.tasks)
            flow_keys = tuple(sorted(
                k for k, m in mapping.edge_to_mem.items()
                if m == move.block and _flow_touches(k, tasks)
            ))
            if tasks and not flow_keys:
                raise InfeasibleMoveError(
                    f"no flows of {sorted(tasks)} live on {move.block}")
        for k in flow_keys:
            if mapping.edge_to_mem.get(k) != move.block:
                raise InfeasibleMoveError(f"flow {k} is not on {move.block}")
            mapping.edge_to_mem[k] = clone_id
    else:  # NoC
        if route_keys is None:
            tasks = set(move.tasks)
            route_keys = tuple(sorted(
                rk for rk, path in mapping.routes.items()
                if move.block in path and _route_owner(rk, tasks, design)
            ))
            if tasks and not route_keys:
                raise InfeasibleMoveError(
                    f"no routes of {sorted(tasks)} cross {move.block}")
        for rk in route_keys:
            path = mapping.routes.get(rk)
            if path is None or move.block not in path:
                raise InfeasibleMoveError(f"route {rk} does not cross {move.block}")
            mapping.routes[rk] = tuple(clone_id if b == move.block else b for b in path)

    return replace(move, clone_id=clone_id, flow_keys=flow_keys, route_keys=route_keys)


def _flow_touches(flow_key: FlowKey, tasks: set) -> bool:
    wl, src, dst = flow_key
    return ((wl, src) in tasks) or ((wl, dst) in tasks)


def _flow_owner(route_key: RouteKey) -> TaskKey:
    """The task whose PE anchors this direction of the flow."""
    (wl, src, dst), direction = route_key
    owner = src if direction == "write" else dst
    if owner == "__io__":
        owner = dst if direction == "write" else src
    return (wl, owner)


def _route_owner(route_key: RouteKey, tasks: set, design) -> bool:
    return _flow_owner(route_key) in tasks


# -- join ------------------------------------------------------------------------

def _apply_join(design, move: Join) -> Join:
    topo = design.topology
    surv = topo.blocks.get(move.survivor)
    gone = topo.blocks.get(move.absorbed)
    if surv is None or gone is None or move.survivor == move.absorbed:
        raise InfeasibleMoveError(f"cannot join {move.survivor!r} and {move.absorbed!r}")
    if surv.knobs() != gone.knobs():
        raise InfeasibleMoveError(
            f"{move.survivor} and {move.absorbed} differ in kind or knobs")
    nb_s = set(topo.neighbors(move.survivor)) - {move.absorbed}
    nb_a = set(topo.neighbors(move.absorbed)) - {move.survivor}
    if nb_s != nb_a:
        raise InfeasibleMoveError(
            f"{move.survivor} and {move.absorbed} are wired differently")

    mapping = design.mapping
    moved_tasks: tuple[TaskKey, ...] = ()
    moved_flows: tuple[FlowKey, ...] = ()
    rerouted: tuple[RouteKey, ...] = ()

    if surv.kind.is_pe:
        moved_tasks = design.tasks_on(move.absorbed)
        for key in moved_tasks:
            mapping.task_to_pe[key] = move.survivor
    elif surv.kind.is_mem:
        moved_flows = design.flows_on_mem(move.absorbed)
        for k in moved_flows:
            mapping.edge_to_mem[k] = move.survivor
    else:
        hits = sorted(rk for rk, path in mapping.routes.items() if move.absorbed in path)
        for rk in hits:
            path = [move.survivor if b == move.absorbed else b for b in mapping.routes[rk]]
            collapsed = [path[0]]
            for b in path[1:]:
                if b != collapsed[-1]:
                    collapsed.append(b)
            mapping.routes[rk] = tuple(collapsed)
        rerouted = tuple(hits)

    topo.remove_block(move.absorbed)
    return replace(move, moved_tasks=moved_tasks, moved_flows=moved_flows,
                   rerouted=rerouted)


# -- migrate --------------------------------------------------------------------

def _task_route_keys(design, task: TaskKey, graphs):
    """Route keys of every flow owned by the task."""
    out = []
    for g in graphs:
        if g.name != task[0]:
            continue
        for fl in g.flows():
            if fl.task == task:
                out.append((fl.key, fl.direction))
    return sorted(out)


def _apply_migrate(design, move: Migrate, graphs, db) -> Migrate:
    topo = design.topology
    src = topo.blocks.get(move.src)
    dst = topo.blocks.get(move.dst)
    if src is None or dst is None or move.src == move.dst:
        raise InfeasibleMoveError(f"cannot migrate {move.src!r} -> {move.dst!r}")
    mapping = design.mapping
    given = dict(move.routes or ())

    if src.kind.is_pe:
        if not dst.kind.is_pe:
            raise InfeasibleMoveError(f"{move.dst} cannot host tasks")
        if mapping.task_to_pe.get(move.task) != move.src:
            raise InfeasibleMoveError(f"task {move.task} is not on {move.src}")
        if dst.kind is BlockKind.PE_ACC and not db.has_acc(move.task[1], dst.unroll):
            raise InfeasibleMoveError(
                f"no accelerator entry for {move.task[1]} at unroll {dst.unroll}")
        mapping.task_to_pe[move.task] = move.dst
        prior = []
        for rk in _task_route_keys(design, move.task, graphs):
            prior.append((rk, mapping.routes[rk]))
            if rk in given:
                mapping.routes[rk] = given[rk]
            else:
                mem = mapping.edge_to_mem[rk[0]]
                try:
                    mapping.routes[rk] = route(design, move.dst, mem)
                except UnreachableError as exc:
                    raise InfeasibleMoveError(str(exc)) from exc
    elif src.kind.is_mem:
        if not dst.kind.is_mem:
            raise InfeasibleMoveError(f"{move.dst} is not a memory")
        prior = []
        if move.routes is not None:
            # inverting: touch exactly the flows the forward move displaced
            touched = [rk for rk, _ in move.routes]
        else:
            # both directions of an edge share one memory, so the whole edge
            # moves and each direction reroutes from its own task's PE
            own_edges = {
                rk[0] for rk in _task_route_keys(design, move.task, graphs)
                if mapping.edge_to_mem.get(rk[0]) == move.src
            }
            touched = sorted(rk for rk in mapping.routes if rk[0] in own_edges)
        if not touched:
            raise InfeasibleMoveError(f"task {move.task} has no flows on {move.src}")
        for rk in touched:
            prior.append((rk, mapping.routes[rk]))
            mapping.edge_to_mem[rk[0]] = move.dst
            if rk in given:
                mapping.routes[rk] = given[rk]
            else:
                pe = mapping.task_to_pe[_flow_owner(rk)]
                try:
                    mapping.routes[rk] = route(design, pe, move.dst)
                except UnreachableError as exc:
                    raise InfeasibleMoveError(str(exc)) from exc
    else:
        if not dst.kind.is_noc:
            raise InfeasibleMoveError(f"{move.dst} is not a NoC")
        prior = []
        if move.routes is not None:
            touched = [rk for rk, _ in move.routes]
        else:
            touched = [
                rk for rk in _task_route_keys(design, move.task, graphs)
                if move.src in mapping.routes.get(rk, ())
            ]
        if not touched:
            raise InfeasibleMoveError(f"task {move.task} has no routes through {move.src}")
        for rk in touched:
            prior.append((rk, mapping.routes[rk]))
            if rk in given:
                mapping.routes[rk] = given[rk]
            else:
                old = mapping.routes[rk]
                if move.dst in old:
                    raise InfeasibleMoveError(f"route already crosses {move.dst}")
                mapping.routes[rk] = tuple(
                    move.dst if b == move.src else b for b in old)

    return replace(move, prior_routes=tuple(prior))


# -- inversion ----------------------------------------------------------------------

def invert_move(move: Move) -> Move:
    """Inverse of an applied move; apply-then-invert restores behavior."""
    if isinstance(move, Swap):
        flipped = "down" if move.direction == "up" else "up"
        return Swap(move.block, move.knob, flipped, unroll_memo=move.unroll_memo)
    if isinstance(move, Fork):
        if move.clone_id is None:
            raise NoApplicableMoveError("cannot invert a fork before it is applied")
        return Join(survivor=move.block, absorbed=move.clone_id)
    if isinstance(move, Join):
        if move.moved_tasks is None:
            raise NoApplicableMoveError("cannot invert a join before it is applied")
        return Fork(block=move.survivor, tasks=move.moved_tasks,
                    flow_keys=move.moved_flows, route_keys=move.rerouted)
    if isinstance(move, Migrate):
        return Migrate(task=move.task, src=move.dst, dst=move.src,
                       routes=move.prior_routes)
    if isinstance(move, ForkSwap):
        return SwapJoin(swap=invert_move(move.swap), join=invert_move(move.fork))
    if isinstance(move, SwapJoin):
        inv_join = invert_move(move.join)
        return ForkSwap(fork=inv_join, swap=invert_move(move.swap))
    raise NoApplicableMoveError(f"unknown move {move!r}")


# -- serialization --------------------------------------------------------------------

def _route_list(entries):
    if entries is None:
        return None
    return [["/".join(rk[0]) + "#" + rk[1], list(path)] for rk, path in entries]


def _route_keys_list(entries):
    if entries is None:
        return None
    return ["/".join(rk[0]) + "#" + rk[1] for rk in entries]


def _parse_route_key(text: str) -> RouteKey:
    key, direction = text.split("#")
    return tuple(key.split("/")), direction


def move_to_dict(move: Move) -> dict:
    if isinstance(move, Swap):
        return {"type": "swap", "block": move.block, "knob": move.knob,
                "direction": move.direction, "unroll_memo": move.unroll_memo}
    if isinstance(move, Fork):
        return {"type": "fork", "block": move.block,
                "tasks": ["/".join(t) for t in move.tasks],
                "clone_id": move.clone_id,
                "flow_keys": (None if move.flow_keys is None
                              else ["/".join(k) for k in move.flow_keys]),
                "route_keys": _route_keys_list(move.route_keys)}
    if isinstance(move, Join):
        return {"type": "join", "survivor": move.survivor, "absorbed": move.absorbed,
                "moved_tasks": (None if move.moved_tasks is None
                                else ["/".join(t) for t in move.moved_tasks]),
                "moved_flows": (None if move.moved_flows is None
                                else ["/".join(k) for k in move.moved_flows]),
                "rerouted": _route_keys_list(move.rerouted)}
    if isinstance(move, Migrate):
        return {"type": "migrate", "task": "/".join(move.task), "src": move.src,
                "dst": move.dst, "routes": _route_list(move.routes),
                "prior_routes": _route_list(move.prior_routes)}
    if isinstance(move, ForkSwap):
        return {"type": "fork_swap", "fork": move_to_dict(move.fork),
                "swap": move_to_dict(move.swap)}
    if isinstance(move, SwapJoin):
        return {"type": "swap_join", "swap": move_to_dict(move.swap),
                "join": move_to_dict(move.join)}
    raise ValueError(f"unknown move {move!r}")


def move_from_dict(doc: dict) -> Move:
    kind = doc["type"]
    if kind == "swap":
        return Swap(doc["block"], doc["knob"], doc["direction"],
                    unroll_memo=doc.get("unroll_memo"))
    if kind == "fork":
        return Fork(
            block=doc["block"],
            tasks=tuple(tuple(t.split("/")) for t in doc["tasks"]),
            clone_id=doc.get("clone_id"),
            flow_keys=(None if doc.get("flow_keys") is None
                       else tuple(tuple(k.split("/")) for k in doc["flow_keys"])),
            route_keys=(None if doc.get("route_keys") is None
                        else tuple(_parse_route_key(t) for t in doc["route_keys"])),
        )
    if kind == "join":
        return Join(
            survivor=doc["survivor"], absorbed=doc["absorbed"],
            moved_tasks=(None if doc.get("moved_tasks") is None
                         else tuple(tuple(t.split("/")) for t in doc["moved_tasks"])),
            moved_flows=(None if doc.get("moved_flows") is None
                         else tuple(tuple(k.split("/")) for k in doc["moved_flows"])),
            rerouted=(None if doc.get("rerouted") is None
                      else tuple(_parse_route_key(t) for t in doc["rerouted"])),
        )
    if kind == "migrate":
        def routes(entries):
            if entries is None:
                return None
            return tuple((_parse_route_key(k), tuple(path)) for k, path in entries)
        return Migrate(task=tuple(doc["task"].split("/")), src=doc["src"],
                       dst=doc["dst"], routes=routes(doc.get("routes")),
                       prior_routes=routes(doc.get("prior_routes")))
    if kind == "fork_swap":
        return ForkSwap(fork=move_from_dict(doc["fork"]), swap=move_from_dict(doc["swap"]))
    if kind == "swap_join":
        return SwapJoin(swap=move_from_dict(doc["swap"]), join=move_from_dict(doc["join"]))
    raise ValueError(f"unknown move type {kind!r}")


# -- random neighbors ------------------------------------------------------------------

def task_blocks(design: DesignPoint, task: TaskKey) -> tuple[str, ...]:
    """Every block the task occupies: its PE, its flows' memories and the
    NoCs its routes cross."""
    found = {design.mapping.task_to_pe[task]}
    for rk, path in design.mapping.routes.items():
        if _flow_owner(rk) == task:
            found.add(design.mapping.edge_to_mem[rk[0]])
            found.update(path)
    return tuple(sorted(found))


def enumerate_candidate_moves(design: DesignPoint, graphs, db: IpDatabase,
                              *, task: TaskKey | None = None,
                              block: str | None = None) -> list[Move]:
    """Concrete move candidates, optionally constrained to a task or block.

    With only a task given, candidates stay in that task's neighborhood (its
    PE, memories and route NoCs).  Candidates are syntactically plausible;
    feasibility is still decided by ``apply_move``.
    """
    out: list[Move] = []
    blocks = sorted(design.topology.blocks)
    if block:
        target_blocks = [block]
    elif task is not None:
        target_blocks = list(task_blocks(design, task))
    else:
        target_blocks = blocks

    for bid in target_blocks:
        blk = design.topology.blocks[bid]
        for knob in KNOBS:
            for direction in DIRECTIONS:
                out.append(Swap(bid, knob, direction))
        if task is not None:
            hosted = [task]
        elif blk.kind.is_pe:
            hosted = list(design.tasks_on(bid))
        else:
            hosted = list(design.tasks_touching(bid, graphs))
        for t in hosted:
            out.append(Fork(bid, (t,)))
            for knob in ("freq", "subtype", "unroll", "bus_width"):
                for direction in DIRECTIONS:
                    out.append(ForkSwap(Fork(bid, (t,)), Swap("", knob, direction)))
            for other in blocks:
                if other != bid:
                    out.append(Migrate(t, bid, other))
        for other in blocks:
            if other != bid and design.topology.blocks[other].knobs() == blk.knobs():
                out.append(Join(survivor=other, absorbed=bid))
    return out


def random_feasible_move(design: DesignPoint, graphs, db: IpDatabase, rng,
                         *, task: TaskKey | None = None,
                         block: str | None = None):
    """Sample one applicable move uniformly from the candidate pool.

    Returns (resolved move, new design); raises NoApplicableMoveError when
    nothing applies.
    """
    candidates = enumerate_candidate_moves(design, graphs, db, task=task, block=block)
    rng.shuffle(candidates)
    for move in candidates:
        try:
            new = apply_move(design, move, graphs, db)
        except InfeasibleMoveError:
            continue
        return new.provenance[-1], new
    raise NoApplicableMoveError("no feasible move on this design")
