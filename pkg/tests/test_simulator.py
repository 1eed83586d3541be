import random

import pytest

from socdse.budget import MetricValues
from socdse.database import AccEntry, GppEntry, IpDatabase, XferEntry, build_grid_database
from socdse.errors import NoRunningTaskError, ZeroRateError
from socdse.hardware import BlockKind, base_design
from socdse.rates import block_rates
from socdse.simulator import (
    completion_time,
    estimate_power_area,
    phase_duration,
    simulate,
)
from socdse.workload import DataEdge, SynthSpec, Task, TaskGraph, synth_workload


def make_db(p_peak=1e8, gpp_leak=0.0, noc_leak=0.0, mem_leak=0.0,
            e_op=0.0, e_byte=0.0, a_peak=None, acc_tasks=(),
            noc_width=4, mem_width=4):
    acc = []
    if a_peak is not None:
        acc = [AccEntry(t, 1, a_peak, e_op, 0.0, 0.1) for t in acc_tasks]
    return IpDatabase(
        gpp=[GppEntry(100, p_peak, e_op, gpp_leak, 1.0)],
        acc=acc,
        noc=[XferEntry(100, noc_width, e_byte, noc_leak, 0.05)],
        mem=[("dram", XferEntry(100, mem_width, e_byte, mem_leak, 0.4))],
    )


def graph(tasks, edges=(), name="w"):
    return TaskGraph(name, tasks, edges)


def test_gpp_rate_splits_equally():
    db = make_db(p_peak=1e9)
    g = graph([Task("a", 1e6), Task("b", 1e6)])
    d = base_design([g], db)
    rates = block_rates(d, [g], db, [("w", "a"), ("w", "b")])
    assert rates[("w", "a")]["gpp_0"]["compute"] == 5e8
    assert rates[("w", "b")]["gpp_0"]["compute"] == 5e8


def test_accelerator_rate_uses_speedup():
    db = make_db(p_peak=1e9, a_peak=10.0, acc_tasks=("a",))
    g = graph([Task("a", 1e6)])
    d = base_design([g], db)
    d.topology.blocks["gpp_0"].kind = BlockKind.PE_ACC
    rates = block_rates(d, [g], db, [("w", "a")])
    assert rates[("w", "a")]["gpp_0"]["compute"] == 1e10


def test_memory_rate_is_burst_proportional():
    # 100 MHz x 8 B memory: 800 MB/s peak split 1:3 across bursts 64 and 192
    db = make_db(p_peak=1e12, mem_width=8, noc_width=256)
    g = graph([Task("a", 8e6, i_read=1.0, burst=64),
               Task("b", 8e6, i_read=1.0, burst=192)])
    d = base_design([g], db)
    rates = block_rates(d, [g], db, [("w", "a"), ("w", "b")])
    assert rates[("w", "a")]["mem_0"]["read"] == 200e6
    assert rates[("w", "b")]["mem_0"]["read"] == 600e6


def test_completion_time_max_over_resources():
    assert completion_time(
        {"compute": 100e6, "read": 10e6, "write": 0.0},
        {"compute": 50e6, "read": 5e6, "write": 1.0},
    ) == 2.0
    assert completion_time({"compute": 100e6}, {"compute": 100e6}) == 1.0
    with pytest.raises(ZeroRateError):
        completion_time({"read": 1.0}, {"read": 0.0})


def test_phase_duration_is_min():
    assert phase_duration([2.0, 5.0]) == 2.0
    assert phase_duration([3.5]) == 3.5
    with pytest.raises(NoRunningTaskError):
        phase_duration([])


def test_single_task_closed_form():
    # compute 1 s, read 0.1 s on a dedicated chain of blocks: one phase
    db = make_db(p_peak=1e8)
    g = graph([Task("a", 1e8, i_read=2.5)])   # 4e7 bytes over 4e8 B/s
    d = base_design([g], db)
    r = simulate(d, [g], db)
    assert r.workload_latency["w"] == 1.0
    assert len(r.phases) == 1
    assert r.makespan == max(1e8 / 1e8, 4e7 / 4e8)


def test_identical_corunners_finish_together():
    db = make_db(p_peak=1e8)
    for n in (2, 4, 8):
        g = graph([Task(f"t{i}", 1e8) for i in range(n)])
        r = simulate(base_design([g], db), [g], db)
        assert r.workload_latency["w"] == n * (1e8 / 1e8)
        assert len(r.phases) == 1


def test_empty_workload_set():
    db = make_db(gpp_leak=1e-3, noc_leak=2e-3, mem_leak=3e-3)
    d = base_design([], db)
    r = simulate(d, [], db)
    assert r.workload_latency == {}
    assert r.energy_j == 0.0
    assert r.area_mm2 == 1.0 + 0.4 + 0.05   # summed in block-id order
    assert r.power_w == pytest.approx(6e-3)


def test_leakage_only_power():
    db = make_db(gpp_leak=1e-3, noc_leak=2e-3, mem_leak=3e-3)
    g = graph([Task("a", 1e8)])
    d = base_design([g], db)
    r = simulate(d, [g], db)
    assert r.makespan == 1.0
    power, area = estimate_power_area(d, r, db)
    assert power == pytest.approx(6e-3)
    assert area == r.area_mm2


def test_dynamic_energy_is_linear_in_coefficients():
    g = graph([Task("a", 1e8, i_read=2.5, i_write=5.0)])
    lo = make_db(e_op=1e-12, e_byte=1e-12)
    hi = make_db(e_op=2e-12, e_byte=2e-12)
    r_lo = simulate(base_design([g], lo), [g], lo)
    r_hi = simulate(base_design([g], hi), [g], hi)
    assert r_hi.energy_j == pytest.approx(2 * r_lo.energy_j)


def test_conservation_and_makespan_additivity():
    rng = random.Random(3)
    for trial in range(10):
        g = synth_workload(SynthSpec(name=f"w{trial}", shape="random", n=8,
                                     seed=rng.randint(0, 999)))
        db = build_grid_database([g])
        d = base_design([g], db)
        r = simulate(d, [g], db)
        assert sum(p.duration for p in r.phases) == r.makespan
        for (wl, tid) in r.processed_ops:
            task = g.tasks[tid]
            assert r.processed_ops[(wl, tid)] == pytest.approx(task.f, rel=1e-9)
            declared = g.read_bytes(tid) + g.write_bytes(tid)
            assert r.processed_bytes[(wl, tid)] == pytest.approx(declared, rel=1e-9)


def test_dependency_safety():
    g = synth_workload(SynthSpec(name="w", shape="random", n=10, seed=5))
    db = build_grid_database([g])
    r = simulate(base_design([g], db), [g], db)
    starts = {}
    t = 0.0
    for p in r.phases:
        for key in p.running:
            starts.setdefault(key, t)
        t += p.duration
    for tid in g.tasks:
        for pred in g.predecessors(tid):
            assert r.task_finish[("w", pred)] <= starts[("w", tid)] + 1e-15


def test_latency_monotone_in_bottleneck_speed():
    g = graph([Task("a", 1e8), Task("b", 2e8)], [DataEdge("a", "b", 100.0)])
    latencies = []
    for p_peak in (1e8, 2e8, 4e8, 8e8):
        db = make_db(p_peak=p_peak)
        latencies.append(simulate(base_design([g], db), [g], db).workload_latency["w"])
    assert latencies == sorted(latencies, reverse=True)


def test_determinism_bit_exact():
    g = synth_workload(SynthSpec(name="w", shape="random", n=9, seed=17))
    db = build_grid_database([g])
    d = base_design([g], db)
    a = simulate(d, [g], db)
    b = simulate(d, [g], db)
    assert a.to_json() == b.to_json()
    assert a.makespan == b.makespan
    assert a.energy_j == b.energy_j


def test_bottleneck_attribution_charges_slowest_block():
    # communication-bound task: all time charged to the memory path
    db = make_db(p_peak=1e12)
    g = graph([Task("a", 1.0, i_read=1e-6, burst=64)])  # 1e6 bytes, trivial compute
    d = base_design([g], db)
    r = simulate(d, [g], db)
    charged = r.task_bottleneck[("w", "a")]
    assert set(charged) <= {"noc_0", "mem_0"}
    assert sum(charged.values()) == pytest.approx(r.makespan)
    kinds = set(r.bottleneck_by_kind)
    assert kinds <= {"noc", "mem_dram"}


def test_result_report_schema():
    g = graph([Task("a", 1e8)])
    db = make_db()
    r = simulate(base_design([g], db), [g], db)
    doc = r.to_json_dict()
    assert set(doc) == {
        "workload_latencies_s", "power_w", "area_mm2", "energy_j", "phases",
        "bottleneck_histogram", "makespan_s", "busy_time_s",
    }
    values = MetricValues.from_result(r)
    assert values.latency_s == r.workload_latency
