import numpy as np
import pytest

from pdboson.linalg import RngStream, haar_random_unitary

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def haar():
    def draw(N, index=0, seed=11):
        return haar_random_unitary(N, RngStream(seed, index))
    return draw


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
