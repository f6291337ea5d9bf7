import numpy as np
import pytest

from lane_emden_lab.bounded_solver import continuation
from lane_emden_lab.greens_ball import BallDomain
from lane_emden_lab.radial_groundstate import ground_state


@pytest.fixture(scope="session")
def bubble3():
    return ground_state(3, 5.0)


@pytest.fixture(scope="session")
def profile34():
    return ground_state(3, 4.0)


@pytest.fixture(scope="session")
def ladder34():
    # n=3, p=4 on the unit ball, eps = 0.05 * 2^-k
    return continuation(3, 4.0, [0.05 * 2.0 ** -k for k in range(6)], BallDomain(3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
