import sys

import numpy as np
import pytest

from cafebot.eval.harness import explored
from cafebot.eval.tour import run_tour
from cafebot.simworld import cafe_small


@pytest.fixture(scope="session")
def cafe():
    return cafe_small()


@pytest.fixture(scope="session")
def toured(cafe):
    """(memory, robot, log) after the exploration tour of the fixture cafe."""
    return run_tour(cafe)


@pytest.fixture(scope="session")
def explored_cafe(cafe):
    mem, robot = explored(cafe)
    return mem, robot


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
