import math

import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run Monte Carlo acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def binomial_margin(rate: float, reps: int, sigmas: float = 3.0) -> float:
    """Half-width of the sigmas-band of an empirical rejection rate."""
    return sigmas * math.sqrt(rate * (1.0 - rate) / reps)


@pytest.fixture
def margin():
    return binomial_margin
