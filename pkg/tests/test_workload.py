import json
import random

import pytest

from socdse.errors import (
    CycleError,
    DanglingEdgeError,
    EmptyGraphError,
    InvalidSpecError,
    SchemaError,
)
from socdse.workload import (
    DataEdge,
    SynthSpec,
    Task,
    TaskGraph,
    compute_llp_avg,
    compute_talp,
    parse_workload,
    serialize_workload,
    synth_workload,
)


def doc(name="w", tasks=(), edges=()):
    return {"name": name, "tasks": list(tasks), "edges": list(edges)}


def task(id, f=1e6, **kw):
    return {"id": id, "f_ops": f, "llp": kw.pop("llp", 1), **kw}


def test_parse_two_task_chain():
    g = parse_workload(doc(tasks=[task("T1"), task("T2")],
                           edges=[{"src": "T1", "dst": "T2", "bytes": 1024}]))
    assert len(g.tasks) == 2
    assert len(g.edges) == 1
    assert g.topological_order() == ("T1", "T2")


def test_parse_rejects_cycle():
    with pytest.raises(CycleError):
        parse_workload(doc(tasks=[task("T1"), task("T2")],
                           edges=[{"src": "T1", "dst": "T2", "bytes": 1},
                                  {"src": "T2", "dst": "T1", "bytes": 1}]))


def test_parse_rejects_dangling_edge():
    with pytest.raises(DanglingEdgeError):
        parse_workload(doc(tasks=[task("T1")],
                           edges=[{"src": "T1", "dst": "nope", "bytes": 1}]))


def test_parse_rejects_unknown_fields():
    with pytest.raises(SchemaError):
        parse_workload(doc(tasks=[{**task("T1"), "color": "red"}]))
    with pytest.raises(SchemaError):
        parse_workload({**doc(), "surprise": 1})
    with pytest.raises(SchemaError):
        parse_workload(doc(edges=[{"src": "a", "dst": "b", "bytes": 1, "lanes": 2}],
                           tasks=[task("a"), task("b")]))


def test_parse_rejects_bad_values():
    with pytest.raises(SchemaError):
        parse_workload(doc(tasks=[task("T1", f=-1)]))
    with pytest.raises(SchemaError):
        parse_workload(doc(tasks=[task("T1", llp=0)]))
    with pytest.raises(SchemaError):
        parse_workload(doc(tasks=[{**task("T1"), "i_read": 0}]))
    with pytest.raises(SchemaError):
        parse_workload(doc(tasks=[task("T1"), task("T1")]))


def test_audio_like_matches_published_characteristics(audio_graph):
    ch = audio_graph.characterize()
    assert len(audio_graph.tasks) == 15
    assert ch.avg_f == 13e6
    assert (ch.avg_i_read, ch.avg_i_write) == (8.0, 12.0)
    assert compute_llp_avg(audio_graph) == 2392.0


def test_talp_chain_is_one():
    n = 7
    tasks = [Task(f"t{i}", 1e6) for i in range(n)]
    edges = [DataEdge(f"t{i}", f"t{i+1}", 10.0) for i in range(n - 1)]
    assert compute_talp(TaskGraph("pipe", tasks, edges)) == 1.0


def test_talp_independent_tasks():
    g = TaskGraph("par", [Task("a", 1), Task("b", 1)], [])
    assert compute_talp(g) == 2.0
    for n in (3, 5, 8):
        g = TaskGraph("par", [Task(f"t{i}", 1) for i in range(n)], [])
        assert compute_talp(g) == 1 + n * (n - 1) / 2


def test_talp_fanout_of_three():
    tasks = [Task("src", 1)] + [Task(f"c{i}", 1) for i in range(3)]
    edges = [DataEdge("src", f"c{i}", 1.0) for i in range(3)]
    assert compute_talp(TaskGraph("fan", tasks, edges)) == 4.0


def test_llp_average():
    g = TaskGraph("w", [Task("a", 1, llp=1), Task("b", 1, llp=1), Task("c", 1, llp=1)], [])
    assert compute_llp_avg(g) == 1.0
    g = TaskGraph("w", [Task("a", 1, llp=100), Task("b", 1, llp=200)], [])
    assert compute_llp_avg(g) == 150.0
    with pytest.raises(EmptyGraphError):
        compute_llp_avg(TaskGraph("w", [], []))


def test_synth_deterministic():
    a = synth_workload(SynthSpec(name="w", shape="chain", n=5, seed=7))
    b = synth_workload(SynthSpec(name="w", shape="chain", n=5, seed=7))
    assert serialize_workload(a) == serialize_workload(b)
    c = synth_workload(SynthSpec(name="w", shape="chain", n=5, seed=8))
    assert serialize_workload(a) != serialize_workload(c)


def test_synth_diamond_talp():
    g = synth_workload(SynthSpec(name="w", shape="diamond", n=4, seed=1))
    assert compute_talp(g) == 2.0


def test_synth_random_dag_valid():
    g = synth_workload(SynthSpec(name="w", shape="random", n=12, seed=3))
    reparsed = parse_workload(serialize_workload(g))
    assert reparsed.topological_order() == g.topological_order()


def test_synth_rejects_bad_spec():
    with pytest.raises(InvalidSpecError):
        synth_workload(SynthSpec(name="w", shape="spiral", n=4))
    with pytest.raises(InvalidSpecError):
        synth_workload(SynthSpec(name="w", shape="chain", n=0))
    with pytest.raises(InvalidSpecError):
        synth_workload(SynthSpec(name="w", shape="diamond", n=2))
    with pytest.raises(InvalidSpecError):
        synth_workload(SynthSpec(name="w", shape="random", n=4, edge_prob=1.5))


def test_roundtrip_is_identity():
    rng = random.Random(42)
    for shape in ("chain", "diamond", "fanout", "random"):
        g = synth_workload(SynthSpec(name="w", shape=shape, n=rng.randint(3, 10),
                                     seed=rng.randint(0, 999)))
        once = serialize_workload(g)
        twice = serialize_workload(parse_workload(once))
        assert once == twice


def test_generated_graphs_pass_parser_validation():
    for seed in range(20):
        g = synth_workload(SynthSpec(name="w", shape="random", n=9, seed=seed))
        parse_workload(json.dumps(g.to_document()))


def test_byte_volume_representation():
    # edge bytes win over intensities; intensities cover boundary traffic
    g = parse_workload(doc(
        tasks=[{**task("a", f=8e6), "i_read": 8, "i_write": 4},
               {**task("b", f=6e6), "i_write": 3}],
        edges=[{"src": "a", "dst": "b", "bytes": 500}],
    ))
    assert g.read_bytes("a") == 1e6        # boundary: f / i_read
    assert g.write_bytes("a") == 500.0     # explicit edge bytes win
    assert g.read_bytes("b") == 500.0
    assert g.write_bytes("b") == 2e6
    flows = g.flows()
    assert {(f.key, f.direction) for f in flows} == {
        (("w", "__io__", "a"), "read"),
        (("w", "a", "b"), "write"),
        (("w", "a", "b"), "read"),
        (("w", "b", "__io__"), "write"),
    }
