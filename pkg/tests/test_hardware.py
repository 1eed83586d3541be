import pytest

from socdse.database import IpDatabase, build_grid_database
from socdse.errors import (
    MissingDatabaseEntryError,
    MissingGppEntryError,
    SchemaError,
    UnreachableError,
)
from socdse.hardware import (
    BlockKind,
    DesignPoint,
    HardwareBlock,
    Mapping,
    Topology,
    base_design,
    route,
    validate_design,
)
from socdse.workload import SynthSpec, synth_workload


def test_base_design_is_three_blocks(small_graph, small_db):
    d = base_design([small_graph], small_db)
    assert len(d.topology.blocks) == 3
    kinds = sorted(b.kind for b in d.topology.blocks.values())
    assert kinds == [BlockKind.MEM_DRAM, BlockKind.NOC, BlockKind.PE_GPP]
    assert validate_design(d, [small_graph], small_db) == []


def test_base_design_empty_workload_set(small_db):
    d = base_design([], small_db)
    assert validate_design(d, [], small_db) == []
    assert d.mapping.task_to_pe == {}


def test_base_design_maps_everything():
    graphs = [synth_workload(SynthSpec(name=f"w{i}", shape="random", n=10, seed=i))
              for i in range(2)]
    db = build_grid_database(graphs)
    d = base_design(graphs, db)
    assert len(d.mapping.task_to_pe) == 20
    assert set(d.mapping.task_to_pe.values()) == {"gpp_0"}


def test_base_design_requires_gpp_entries(small_graph, small_db):
    empty = IpDatabase(gpp=[], acc=[], noc=list(small_db.noc.values()),
                       mem=[(k[0], e) for k, e in small_db.mem.items()])
    with pytest.raises(MissingGppEntryError):
        base_design([small_graph], empty)


def test_validate_reports_unmapped_task(small_graph, small_db):
    d = base_design([small_graph], small_db)
    key = next(iter(d.mapping.task_to_pe))
    del d.mapping.task_to_pe[key]
    report = validate_design(d, [small_graph], small_db)
    assert any("unmapped" in r and key[1] in r for r in report)


def test_validate_reports_pe_to_mem_link(small_graph, small_db):
    d = base_design([small_graph], small_db)
    d.topology.add_link("gpp_0", "mem_0")
    report = validate_design(d, [small_graph], small_db)
    assert any("not allowed" in r for r in report)


def test_b_peak_follows_knobs():
    blk = HardwareBlock("n", BlockKind.NOC, 100, 8)
    assert blk.b_peak == 100e6 * 8
    blk.freq_mhz = 800
    blk.bus_width_b = 256
    assert blk.b_peak == 800e6 * 256


def _design_with_nocs(layout):
    """PE and MEM bridged by the given NoC link structure."""
    topo = Topology(
        blocks=[HardwareBlock("pe", BlockKind.PE_GPP, 100),
                HardwareBlock("mem", BlockKind.MEM_DRAM, 100, 8)]
               + [HardwareBlock(n, BlockKind.NOC, 100, 8) for n in layout["nocs"]],
        links=layout["links"],
    )
    return DesignPoint(topo, Mapping())


def test_route_base_design(small_graph, small_db):
    d = base_design([small_graph], small_db)
    assert route(d, "gpp_0", "mem_0") == ("noc_0",)


def test_route_series():
    d = _design_with_nocs({
        "nocs": ["n1", "n2"],
        "links": [("pe", "n1"), ("n1", "n2"), ("n2", "mem")],
    })
    assert route(d, "pe", "mem") == ("n1", "n2")


def test_route_tie_breaks_lexicographically():
    d = _design_with_nocs({
        "nocs": ["n1", "n2"],
        "links": [("pe", "n1"), ("pe", "n2"), ("n1", "mem"), ("n2", "mem")],
    })
    assert route(d, "pe", "mem") == ("n1",)


def test_route_unreachable():
    d = _design_with_nocs({"nocs": ["n1"], "links": [("pe", "n1")]})
    with pytest.raises(UnreachableError):
        route(d, "pe", "mem")


def test_route_deterministic_across_runs(small_graph, small_db):
    d = base_design([small_graph], small_db)
    paths = {route(d, "gpp_0", "mem_0") for _ in range(5)}
    assert len(paths) == 1


def test_design_roundtrips_through_dict(small_graph, small_db):
    d = base_design([small_graph], small_db)
    d2 = DesignPoint.from_dict(d.to_dict())
    assert d2.to_dict() == d.to_dict()
    assert validate_design(d2, [small_graph], small_db) == []


def test_database_roundtrip(small_db):
    again = IpDatabase.from_json(small_db.to_json())
    assert again.to_json() == small_db.to_json()


def test_database_rejects_unknown_fields():
    with pytest.raises(SchemaError):
        IpDatabase.from_dict({"gpp": [], "cpu": []})
    with pytest.raises(SchemaError):
        IpDatabase.from_dict({"gpp": [{"freq_mhz": 100, "p_peak_ops_s": 1e8,
                                       "e_op_j": 1e-12, "leak_w": 0, "area_mm2": 1,
                                       "cache_kb": 32}]})


def test_database_rejects_shrinking_speedup():
    with pytest.raises(SchemaError):
        IpDatabase.from_dict({"acc": [
            {"task": "t", "unroll": 1, "a_peak": 8, "e_op_j": 0, "leak_w": 0, "area_mm2": 0.1},
            {"task": "t", "unroll": 2, "a_peak": 4, "e_op_j": 0, "leak_w": 0, "area_mm2": 0.1},
        ]})


def test_gpp_peak_scales_linearly(small_db):
    only_100 = IpDatabase(gpp=[small_db.gpp[100]], acc=[],
                          noc=list(small_db.noc.values()),
                          mem=[(k[0], e) for k, e in small_db.mem.items()])
    assert only_100.gpp_p_peak_at(100) == small_db.gpp[100].p_peak_ops_s
    assert only_100.gpp_p_peak_at(400) == 4 * small_db.gpp[100].p_peak_ops_s
    with pytest.raises(MissingDatabaseEntryError):
        only_100.noc_entry(100, 3)
