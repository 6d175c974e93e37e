import numpy as np
import pytest

from subspar.generators import gnp


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_random_graph(rng):
    return gnp(30, 0.3, rng)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
