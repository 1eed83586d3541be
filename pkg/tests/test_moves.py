import random

import pytest

from socdse.database import build_grid_database
from socdse.errors import InfeasibleMoveError
from socdse.hardware import base_design, validate_design
from socdse.moves import (
    Fork,
    Join,
    Migrate,
    Swap,
    apply_move,
    invert_move,
    move_from_dict,
    move_to_dict,
    random_feasible_move,
)
from socdse.simulator import simulate
from socdse.workload import SynthSpec, Task, TaskGraph, synth_workload


@pytest.fixture()
def parallel_setup():
    g = TaskGraph("w", [Task("T1", 2e8, i_read=4.0), Task("T2", 1e8, i_read=4.0)], [])
    db = build_grid_database([g])
    return g, db, base_design([g], db)


def metrics(design, g, db):
    r = simulate(design, [g], db)
    return (tuple(sorted(r.workload_latency.items())), r.power_w, r.area_mm2, r.energy_j)


def test_freq_swap_steps_one_notch(parallel_setup):
    g, db, d = parallel_setup
    out = apply_move(d, Swap("noc_0", "freq", "up"), [g], db)
    assert out.topology.blocks["noc_0"].freq_mhz == 200
    assert d.topology.blocks["noc_0"].freq_mhz == 100     # input untouched
    others = [(b.kind, b.freq_mhz) for bid, b in sorted(out.topology.blocks.items())
              if bid != "noc_0"]
    assert others == [(b.kind, b.freq_mhz) for bid, b in sorted(d.topology.blocks.items())
                      if bid != "noc_0"]


def test_swap_at_ladder_boundary_is_infeasible(parallel_setup):
    g, db, d = parallel_setup
    for _ in range(3):
        d = apply_move(d, Swap("noc_0", "freq", "up"), [g], db)
    assert d.topology.blocks["noc_0"].freq_mhz == 800
    with pytest.raises(InfeasibleMoveError):
        apply_move(d, Swap("noc_0", "freq", "up"), [g], db)
    with pytest.raises(InfeasibleMoveError):
        apply_move(d, Swap("gpp_0", "bus_width", "up"), [g], db)


def test_fork_splits_designated_tasks(parallel_setup):
    g, db, d = parallel_setup
    out = apply_move(d, Fork("gpp_0", (("w", "T2"),)), [g], db)
    fork = out.provenance[-1]
    assert out.tasks_on("gpp_0") == (("w", "T1"),)
    assert out.tasks_on(fork.clone_id) == (("w", "T2"),)
    assert validate_design(out, [g], db) == []


def test_fork_requires_hosted_task(parallel_setup):
    g, db, d = parallel_setup
    with pytest.raises(InfeasibleMoveError):
        apply_move(d, Fork("mem_0", (("w", "nope"),)), [g], db)


def test_join_requires_identical_twins(parallel_setup):
    g, db, d = parallel_setup
    forked = apply_move(d, Fork("gpp_0", (("w", "T2"),)), [g], db)
    clone = forked.provenance[-1].clone_id
    swapped = apply_move(forked, Swap(clone, "freq", "up"), [g], db)
    with pytest.raises(InfeasibleMoveError):
        apply_move(swapped, Join(survivor="gpp_0", absorbed=clone), [g], db)
    joined = apply_move(forked, Join(survivor="gpp_0", absorbed=clone), [g], db)
    assert len(joined.topology.blocks) == 3
    assert joined.tasks_on("gpp_0") == (("w", "T1"), ("w", "T2"))


def test_migrate_rejects_incompatible_destination(parallel_setup):
    g, db, d = parallel_setup
    with pytest.raises(InfeasibleMoveError):
        apply_move(d, Migrate(("w", "T1"), "gpp_0", "mem_0"), [g], db)
    with pytest.raises(InfeasibleMoveError):
        apply_move(d, Migrate(("w", "T1"), "gpp_0", "gpp_0"), [g], db)


def test_migrate_to_accelerator_needs_entry(parallel_setup):
    g, db, d = parallel_setup
    forked = apply_move(d, Fork("gpp_0", (("w", "T2"),)), [g], db)
    clone = forked.provenance[-1].clone_id
    acc = apply_move(forked, Swap(clone, "subtype", "up"), [g], db)
    moved = apply_move(acc, Migrate(("w", "T1"), "gpp_0", clone), [g], db)
    assert moved.tasks_on(clone) == (("w", "T1"), ("w", "T2"))

    bare = build_grid_database([g], with_acc=False)
    with pytest.raises(InfeasibleMoveError):
        apply_move(forked, Swap(clone, "subtype", "up"), [g], bare)


def test_noc_migrate_substitutes_equal_route(parallel_setup):
    g, db, d = parallel_setup
    forked = apply_move(d, Fork("noc_0", (("w", "T1"),)), [g], db)
    clone = forked.provenance[-1].clone_id
    routes = {rk: path for rk, path in forked.mapping.routes.items() if clone in path}
    assert routes, "fork moved no routes"
    back = apply_move(forked, Migrate(("w", "T1"), clone, "noc_0"), [g], db)
    assert all(clone not in path for path in back.mapping.routes.values())


def test_inversion_restores_metrics_for_every_variant(parallel_setup):
    g, db, d = parallel_setup
    d = apply_move(d, Fork("gpp_0", (("w", "T2"),)), [g], db)  # enable migrate/join
    rng = random.Random(11)
    seen = set()
    base_metrics = metrics(d, g, db)
    for _ in range(80):
        move, new = random_feasible_move(d, [g], db, rng)
        seen.add(move.kind)
        back = apply_move(new, invert_move(new.provenance[-1]), [g], db)
        assert metrics(back, g, db) == base_metrics, move
    assert {"swap", "fork", "migrate", "fork_swap", "join"} <= seen


def test_inversion_after_walks():
    g = synth_workload(SynthSpec(name="w", shape="random", n=7, seed=21))
    db = build_grid_database([g])
    rng = random.Random(5)
    design = base_design([g], db)
    for step in range(25):
        move, new = random_feasible_move(design, [g], db, rng)
        before = metrics(design, g, db)
        back = apply_move(new, invert_move(new.provenance[-1]), [g], db)
        assert metrics(back, g, db) == before, (step, move)
        design = new
    assert validate_design(design, [g], db) == []


def test_applied_designs_always_validate():
    g = synth_workload(SynthSpec(name="w", shape="random", n=6, seed=8))
    db = build_grid_database([g])
    rng = random.Random(2)
    design = base_design([g], db)
    for _ in range(40):
        _, design = random_feasible_move(design, [g], db, rng)
        assert validate_design(design, [g], db) == []


def test_move_serialization_roundtrip(parallel_setup):
    g, db, d = parallel_setup
    rng = random.Random(3)
    design = d
    for _ in range(15):
        _, design = random_feasible_move(design, [g], db, rng)
    for move in design.provenance:
        again = move_from_dict(move_to_dict(move))
        assert again == move


def test_incrementality(parallel_setup):
    g, db, d = parallel_setup
    out = apply_move(d, Swap("gpp_0", "freq", "up"), [g], db)
    assert len(out.topology.blocks) == len(d.topology.blocks)
    assert out.mapping.task_to_pe == d.mapping.task_to_pe
    out = apply_move(d, Fork("gpp_0", (("w", "T2"),)), [g], db)
    assert len(out.topology.blocks) == len(d.topology.blocks) + 1
    changed = {k for k in out.mapping.task_to_pe
               if out.mapping.task_to_pe[k] != d.mapping.task_to_pe[k]}
    assert changed == {("w", "T2")}
