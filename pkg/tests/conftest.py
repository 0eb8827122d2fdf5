from pathlib import Path

import pytest

from orbitplan.gateway.tle_source import FileTleSource
from orbitplan.orbitcore import to_unix
from orbitplan.propagator import PropagationConfig, propagate_trajectory

FIXTURES = Path(__file__).parent / "fixtures"
START = to_unix("2024-03-20T00:00:00Z")
FIXTURE_TLES = {"iss": 25544, "sso": 43013, "lowinc": 48274}


def load_fixture_tle(name: str):
    return FileTleSource(FIXTURES / f"{name}.tle").fetch(FIXTURE_TLES[name])


@pytest.fixture(scope="session")
def iss_tle():
    return load_fixture_tle("iss")


@pytest.fixture(scope="session")
def sso_tle():
    return load_fixture_tle("sso")


@pytest.fixture(scope="session")
def iss_traj(iss_tle):
    return propagate_trajectory(iss_tle, PropagationConfig(START))


@pytest.fixture(scope="session")
def sso_traj(sso_tle):
    return propagate_trajectory(sso_tle, PropagationConfig(START))
