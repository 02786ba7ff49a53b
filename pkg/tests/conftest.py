import logging

import numpy as np
import pytest

from app.digraph import build_graph
from app.services.runner import bundled_config
from app.simulator import simulate

from helpers import CASE1_EDGES, CASE2_EDGES


@pytest.fixture(autouse=True)
def reset_app_logger():
    """Drop handlers the CLI attaches so they never outlive the captured streams"""
    yield
    logger = logging.getLogger("app")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def case1_graph():
    return build_graph(5, CASE1_EDGES)


@pytest.fixture
def case2_graph():
    return build_graph(5, CASE2_EDGES)


@pytest.fixture(scope="session")
def case1_trace():
    return simulate(bundled_config("case1"))


@pytest.fixture(scope="session")
def case2_trace():
    return simulate(bundled_config("case2"))


@pytest.fixture(scope="session")
def broken_trace():
    return simulate(bundled_config("case2_broken"))
