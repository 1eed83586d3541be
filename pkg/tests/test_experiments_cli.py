import csv
import json
from pathlib import Path

import pytest

from socdse.budget import Budget, MetricValues
from socdse.cli import main
from socdse.database import build_grid_database
from socdse.errors import SchemaError
from socdse.experiments import (
    CODESIGN_CSV_COLUMNS,
    CONVERGENCE_CSV_COLUMNS,
    PARETO_CSV_COLUMNS,
    ExperimentSpec,
    accelerator_level_parallelism,
    coefficient_of_variation,
    compose_metrics,
    pareto_front,
    run_divide_conquer,
    run_sweep,
    run_validate,
)
from socdse.explorer import TRACE_CSV_COLUMNS, ExplorerConfig
from socdse.hardware import base_design
from socdse.simulator import simulate
from socdse.workload import SynthSpec, serialize_workload, synth_workload

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture()
def tiny_experiment(tmp_path):
    """One small workload with a database and an unreachable budget."""
    g = synth_workload(SynthSpec(name="tiny", shape="random", n=5, seed=4))
    db = build_grid_database([g])
    wl = tmp_path / "tiny.json"
    wl.write_text(serialize_workload(g))
    dbf = tmp_path / "db.json"
    dbf.write_text(db.to_json())
    r = simulate(base_design([g], db), [g], db)
    budget = tmp_path / "budget.json"
    budget.write_text(json.dumps({
        "workloads": {"tiny": r.workload_latency["tiny"] * 1e3 / 4},
        "power_mw": r.power_w * 1e3 * 2,
        "area_mm2": r.area_mm2 * 2,
    }))
    return wl, dbf, budget


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0].startswith("# {")   # embedded provenance header
    return rows[1], rows[2:]


def test_cli_simulate(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["simulate", "--workloads", str(DATA / "audio_like.json"),
               "--db", str(DATA / "ip_db.json"), "--out", str(out)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["workload_latencies_s"]["audio"] > 0
    saved = json.loads((out / "sim_result.json").read_text())
    assert {"spec_hash", "seed", "tool_version"} <= set(saved)


def test_cli_explore_artifacts_and_reproducibility(tiny_experiment, tmp_path, capsys):
    wl, dbf, budget = tiny_experiment
    args = ["explore", "--workloads", str(wl), "--db", str(dbf),
            "--budget", str(budget), "--max-iterations", "12", "--seed", "9"]
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(args + ["--out", str(out1)]) == 0
    capsys.readouterr()
    assert main(args + ["--out", str(out2)]) == 0
    for name in ("trace.csv", "trace.json", "best_design.json", "best_result.json",
                 "summary.json", "convergence.csv", "codesign.csv", "report.json"):
        assert (out1 / name).read_text() == (out2 / name).read_text(), name

    columns, _ = read_csv(out1 / "trace.csv")
    assert tuple(columns) == TRACE_CSV_COLUMNS
    columns, _ = read_csv(out1 / "convergence.csv")
    assert tuple(columns) == CONVERGENCE_CSV_COLUMNS
    columns, _ = read_csv(out1 / "codesign.csv")
    assert tuple(columns) == CODESIGN_CSV_COLUMNS
    summary = json.loads((out1 / "summary.json").read_text())
    assert summary["seed"] == 9
    assert "design_summary" in summary


def test_cli_report_from_trace(tiny_experiment, tmp_path, capsys):
    wl, dbf, budget = tiny_experiment
    out = tmp_path / "run"
    main(["explore", "--workloads", str(wl), "--db", str(dbf), "--budget",
          str(budget), "--max-iterations", "8", "--out", str(out)])
    capsys.readouterr()
    rep = tmp_path / "rep"
    assert main(["report", "--trace", str(out / "trace.json"), "--out", str(rep)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload["codesign"]) == {"metric", "workload", "high_level",
                                        "low_level", "bound"}
    assert (rep / "codesign.csv").exists()


def test_cli_rejects_budget_workload_mismatch(tiny_experiment, tmp_path):
    wl, dbf, _ = tiny_experiment
    bad = tmp_path / "bad_budget.json"
    bad.write_text(json.dumps({"workloads": {"other": 10.0}, "power_mw": 1,
                               "area_mm2": 1}))
    rc = main(["explore", "--workloads", str(wl), "--db", str(dbf),
               "--budget", str(bad), "--out", str(tmp_path / "x")])
    assert rc == 2


def test_cli_missing_file_is_reported(tmp_path):
    rc = main(["simulate", "--workloads", str(tmp_path / "nope.json"),
               "--db", str(DATA / "ip_db.json"), "--out", str(tmp_path)])
    assert rc == 2


def test_pareto_front_drops_dominated_points():
    pts = [(1.0, 2.0), (2.0, 2.0), (0.5, 3.0), (1.0, 2.0)]
    front = pareto_front(pts)
    assert (2.0, 2.0) not in front          # dominated by (1.0, 2.0)
    assert (0.5, 3.0) in front
    assert (1.0, 2.0) in front
    single = pareto_front([(1, 1), (2, 0.5)])
    assert len(single) == 2                  # mutually non-dominated


def test_sweep_permutation_count(tiny_experiment, tmp_path):
    wl, dbf, budget = tiny_experiment
    spec = ExperimentSpec(
        mode="sweep", workload_paths=(str(wl),), db_path=str(dbf),
        budget_path=str(budget), out_dir=str(tmp_path / "sweep"), seed=3,
        config=ExplorerConfig(seed=3, max_iterations=6))
    result = run_sweep(spec, grid_pct=50.0)
    fronts = result["summary"]["front_sizes"]
    assert result["summary"]["permutations"] == fronts["tiny"]
    columns, rows = read_csv(tmp_path / "sweep" / "pareto.csv")
    assert tuple(columns) == PARETO_CSV_COLUMNS
    assert rows


def test_sweep_combines_workload_fronts(tmp_path):
    graphs = [synth_workload(SynthSpec(name=f"w{i}", shape="chain", n=3, seed=i))
              for i in range(2)]
    db = build_grid_database(graphs)
    paths = []
    for g in graphs:
        p = tmp_path / f"{g.name}.json"
        p.write_text(serialize_workload(g))
        paths.append(str(p))
    dbf = tmp_path / "db.json"
    dbf.write_text(db.to_json())
    r = simulate(base_design(graphs, db), graphs, db)
    budget = tmp_path / "budget.json"
    budget.write_text(json.dumps({
        "workloads": {g.name: r.workload_latency[g.name] * 1e3 for g in graphs},
        "power_mw": r.power_w * 1e3 * 4, "area_mm2": r.area_mm2 * 4,
    }))
    spec = ExperimentSpec(
        mode="sweep", workload_paths=tuple(paths), db_path=str(dbf),
        budget_path=str(budget), out_dir=str(tmp_path / "out"), seed=1,
        config=ExplorerConfig(seed=1, max_iterations=4))
    result = run_sweep(spec, grid_pct=50.0)
    fronts = result["summary"]["front_sizes"]
    assert result["summary"]["permutations"] == fronts["w0"] * fronts["w1"]


def test_divide_conquer_myopic_sub_budgets(tiny_experiment, tmp_path):
    wl, dbf, budget = tiny_experiment
    spec = ExperimentSpec(
        mode="divide_conquer", workload_paths=(str(wl),), db_path=str(dbf),
        budget_path=str(budget), out_dir=str(tmp_path / "dc2"), seed=2,
        config=ExplorerConfig(seed=2, max_iterations=8))
    sub = {"tiny": {"power_w": 1e-4, "area_mm2": 0.5}}
    report = run_divide_conquer(spec, sub)
    signed = report["myopic"]["signed_distance_pct"]["tiny"]
    # such a tight hand budget is never met: signed distance goes negative
    assert signed["power"] < 0
    assert report["holistic"]["power_w"] > 0


def test_divide_conquer_single_workload_degenerates(tiny_experiment, tmp_path):
    wl, dbf, budget = tiny_experiment
    spec = ExperimentSpec(
        mode="divide_conquer", workload_paths=(str(wl),), db_path=str(dbf),
        budget_path=str(budget), out_dir=str(tmp_path / "dc"), seed=5,
        config=ExplorerConfig(seed=5, max_iterations=10))
    report = run_divide_conquer(spec)
    # one workload, identical budget: isolated run == holistic run
    assert report["degradation"]["power"] == pytest.approx(0.0, abs=1e-12)
    assert report["degradation"]["area"] == pytest.approx(0.0, abs=1e-12)
    assert (tmp_path / "dc" / "divide_conquer.json").exists()


def test_holistic_beats_myopic_on_shared_memory(tmp_path):
    """Workloads hammering one memory: isolated exploration cannot share it."""
    import statistics

    graphs = [synth_workload(SynthSpec(name=f"w{i}", shape="chain", n=4, seed=40 + i,
                                       bytes_range=(5e6, 2e7)))
              for i in range(3)]
    db = build_grid_database(graphs, acc_coverage=0.5)
    paths = []
    for g in graphs:
        p = tmp_path / f"{g.name}.json"
        p.write_text(serialize_workload(g))
        paths.append(str(p))
    dbf = tmp_path / "db.json"
    dbf.write_text(db.to_json())
    r = simulate(base_design(graphs, db), graphs, db)
    budget = tmp_path / "budget.json"
    budget.write_text(json.dumps({
        "workloads": {g.name: r.workload_latency[g.name] * 1e3 / 3 for g in graphs},
        "power_mw": r.power_w * 1e3 * 2, "area_mm2": r.area_mm2 * 2,
    }))
    gaps = []
    for seed in range(5):
        spec = ExperimentSpec(
            mode="divide_conquer", workload_paths=tuple(paths), db_path=str(dbf),
            budget_path=str(budget), out_dir=str(tmp_path / f"dc{seed}"),
            seed=seed, config=ExplorerConfig(seed=seed, max_iterations=40))
        report = run_divide_conquer(spec)
        gaps.append(report["myopic"]["distance"] - report["holistic"]["distance"])
    assert statistics.median(gaps) >= 0.0


def test_compose_metrics_is_additive():
    a = MetricValues({"x": 0.1}, 1.0, 2.0)
    b = MetricValues({"y": 0.2}, 3.0, 4.0)
    c = compose_metrics({"x": a, "y": b})
    assert c.power_w == 4.0
    assert c.area_mm2 == 6.0
    assert c.latency_s == {"x": 0.1, "y": 0.2}


def test_validate_driver(tmp_path):
    spec = ExperimentSpec(mode="validate", out_dir=str(tmp_path), seed=1)
    summary = run_validate(spec, dt_rel=1e-3, trials=3)
    assert summary["max_rel_error"] < 0.01
    assert summary["median_speed_ratio"] > 1
    saved = json.loads((tmp_path / "validation.json").read_text())
    assert {"spec_hash", "seed", "tool_version"} <= set(saved)


def test_coefficient_of_variation():
    assert coefficient_of_variation([2, 2, 2]) == 0.0
    assert coefficient_of_variation([1, 3]) == 0.5   # population std over mean
    assert coefficient_of_variation([]) == 0.0


def test_alp_single_busy_pe():
    g = synth_workload(SynthSpec(name="w", shape="chain", n=4, seed=1))
    db = build_grid_database([g])
    r = simulate(base_design([g], db), [g], db)
    assert accelerator_level_parallelism(r) == pytest.approx(1.0)


def test_experiment_spec_rejects_unknown_mode(tmp_path):
    with pytest.raises(SchemaError):
        ExperimentSpec(mode="dance", out_dir=str(tmp_path))


def test_data_files_roundtrip():
    from socdse.database import IpDatabase
    from socdse.workload import parse_workload

    for name in ("audio_like.json", "camera_like.json", "edge_like.json"):
        text = (DATA / name).read_text()
        g = parse_workload(text)
        assert serialize_workload(parse_workload(serialize_workload(g))) == \
            serialize_workload(g)
    db = IpDatabase.from_json((DATA / "ip_db.json").read_text())
    assert IpDatabase.from_json(db.to_json()).to_json() == db.to_json()
    b = Budget.from_json((DATA / "budget_demo.json").read_text())
    assert Budget.from_json(json.dumps(b.to_json_dict())).to_json_dict() == \
        b.to_json_dict()
