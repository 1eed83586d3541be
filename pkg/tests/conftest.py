from pathlib import Path

import pytest

from socdse.database import build_grid_database
from socdse.workload import SynthSpec, parse_workload, synth_workload

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def audio_graph():
    return parse_workload((DATA / "audio_like.json").read_text())


@pytest.fixture(scope="session")
def demo_graphs():
    return [
        parse_workload((DATA / name).read_text())
        for name in ("audio_like.json", "camera_like.json", "edge_like.json")
    ]


@pytest.fixture()
def small_graph():
    return synth_workload(SynthSpec(name="small", shape="random", n=6, seed=11))


@pytest.fixture()
def small_db(small_graph):
    return build_grid_database([small_graph])
