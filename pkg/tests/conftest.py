import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from skyway.citygen import generate_city
from skyway.network import NetworkParams, build_network


@pytest.fixture(scope="session")
def fixture_city():
    return generate_city(42)


@pytest.fixture(scope="session")
def fixture_network(fixture_city):
    return build_network(fixture_city, NetworkParams())
