"""Shared fixtures: the default wave building set is expensive, build it once."""

import pytest

from kpodnn.config import default_config
from kpodnn.pipeline import build_building_set, build_test_set, make_basis


@pytest.fixture(scope="session")
def smoke_config():
    return default_config()


@pytest.fixture(scope="session")
def building_set(smoke_config):
    return build_building_set(smoke_config)


@pytest.fixture(scope="session")
def test_set(smoke_config):
    return build_test_set(smoke_config)


@pytest.fixture(scope="session")
def kpod_basis_smoke(smoke_config, building_set):
    return make_basis(building_set, smoke_config, method="kpod")


@pytest.fixture(scope="session")
def pod_basis_smoke(smoke_config, building_set):
    return make_basis(building_set, smoke_config, method="pod")
