import pytest

from plantagents import PlantSim, bundled_catalog, bundled_task_spec, bundled_task_specs


@pytest.fixture(scope="session")
def registry():
    return bundled_catalog()


@pytest.fixture(scope="session")
def task_specs():
    return bundled_task_specs()


@pytest.fixture
def drilled_spec():
    return bundled_task_spec("drilled_sheet")


@pytest.fixture
def lasered_spec():
    return bundled_task_spec("lasered_nameplate")


@pytest.fixture
def returned_spec():
    return bundled_task_spec("returned_nameplate")


@pytest.fixture
def sim(registry):
    return PlantSim.standard_start(registry)
