import json
from pathlib import Path

import pytest

from capaplan.model import parse_model
from capaplan.store import GraphStore

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


@pytest.fixture(scope="session")
def plant_model():
    return parse_model((FIXTURES / "mps500.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def depth_station_model():
    return parse_model((FIXTURES / "depth_station.json").read_text(encoding="utf-8"))


@pytest.fixture
def plant_store(plant_model):
    return GraphStore.load(plant_model)


@pytest.fixture
def depth_station_store(depth_station_model):
    return GraphStore.load(depth_station_model)


def load_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))
