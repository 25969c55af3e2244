import pytest

from app.schemas.maps import MapFamily, MapSpec
from app.schemas.operators import YGrid
from app.services.induced_operator import assemble_Rn, invariant_density


@pytest.fixture(scope="session")
def lsv_spec():
    return MapSpec(family=MapFamily.LSV, alpha=2.0)


@pytest.fixture(scope="session")
def lsv0_spec():
    return MapSpec(family=MapFamily.LSV0)


@pytest.fixture(scope="session")
def grid():
    return YGrid(M=64)


@pytest.fixture(scope="session")
def lsv_operator(lsv_spec, grid):
    return assemble_Rn(lsv_spec, grid, 400)


@pytest.fixture(scope="session")
def lsv_density(lsv_operator):
    return invariant_density(lsv_operator)


@pytest.fixture(scope="session")
def desk_operator(lsv_spec):
    return assemble_Rn(lsv_spec, YGrid(M=256), 2000)


@pytest.fixture(scope="session")
def desk_density(desk_operator):
    return invariant_density(desk_operator)


@pytest.fixture(scope="session")
def steep_spec():
    return MapSpec(family=MapFamily.LSV, alpha=1 / 0.6)


@pytest.fixture(scope="session")
def steep_operator(steep_spec):
    return assemble_Rn(steep_spec, YGrid(M=256), 2000)


@pytest.fixture(scope="session")
def steep_density(steep_operator):
    return invariant_density(steep_operator)
