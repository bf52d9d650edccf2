import numpy as np
import pytest
from hypothesis import settings

from crofton_tensors.bodies import Ball, Ellipsoid, Polytope

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")

# lines printed after the run by the acceptance suite
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def disk():
    return Ellipsoid(np.zeros(2), np.array([1.0, 1.0]))


@pytest.fixture
def square():
    return Polytope.polygon([[0, 0], [1, 0], [1, 1], [0, 1]])


@pytest.fixture
def triangle():
    return Polytope.polygon([[0, 0], [1, 0], [0, 1]])


@pytest.fixture
def ellipse21():
    return Ellipsoid(np.zeros(2), np.array([2.0, 1.0]))


@pytest.fixture
def ball3():
    return Ball(np.zeros(3), 1.0)


@pytest.fixture
def spheroid():
    return Ellipsoid(np.zeros(3), np.array([1.0, 1.0, 2.0]))
