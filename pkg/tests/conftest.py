import json

from fractions import Fraction

import pytest

from plslope.config import Config
from plslope.core_map import PLMap, identity_map
from plslope.lab.families import horseshoe3, tent2, golden_mean_map, interchange_map, example1, example2_map

def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running solver and experiment runs")


@pytest.fixture
def horseshoe():
    return horseshoe3()

@pytest.fixture
def tent():
    return tent2()

@pytest.fixture
def golden():
    return golden_mean_map()

@pytest.fixture
def interchange():
    return interchange_map()

@pytest.fixture
def identity():
    return identity_map()

@pytest.fixture
def example2():
    return example2_map()

@pytest.fixture
def gtilde0():
    """Degenerate Example 1 member: constant slope 3, [0, 1/2] invariant."""
    return example1(0).g_tilde

@pytest.fixture
def small_config():
    return Config({
        "entropy": {"lap_depth": 8, "grid_size": 4096},
        "parry": {"breakpoint_cap": 8192},
    })

@pytest.fixture
def map_file(tmp_path):
    """Writes a map as JSON and returns its path."""
    def write(f, name="map.json"):
        path = tmp_path / name
        dots = [[str(Fraction(x)), str(Fraction(y))] for x, y in (f.dots if isinstance(f, PLMap) else f)]
        path.write_text(json.dumps({"dots": dots}))
        return str(path)
    return write
