import pytest

from hypeca.golden import load_goldens
from hypeca.rules import load_rules
from hypeca.tiling import build_ball


@pytest.fixture(scope="session")
def table():
    return load_rules()


@pytest.fixture(scope="session")
def ball5():
    return build_ball(5)


@pytest.fixture(scope="session")
def goldens():
    return load_goldens()
