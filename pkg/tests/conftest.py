import pytest

from poisson_forge import groupoid as gp
from poisson_forge import resolution as rs


@pytest.fixture(scope="session")
def dazord():
    return gp.catalog("dazord")


@pytest.fixture(scope="session")
def cotangent_sl2():
    return gp.catalog("cotangent-sl2")


@pytest.fixture(scope="session")
def cotangent_sl3():
    return gp.catalog("cotangent-sl3")


@pytest.fixture(scope="session")
def conjugation_sl2():
    return gp.catalog("conjugation-sl2")


@pytest.fixture(scope="session")
def r2_etale():
    return rs.build_r2(0)


@pytest.fixture(scope="session")
def r2_full():
    return rs.build_r2(1)
