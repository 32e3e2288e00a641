import math

import pytest
from hypothesis import settings

from blowup_profiles import ProblemParams

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# Lines appended by the acceptance tests; echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def p41():
    """(n, s, q, mu) = (4, 1, 2.5, 1), the reference grid point."""
    return ProblemParams(4, 1.0, 2.5, 1.0)


@pytest.fixture
def p41_limit():
    return ProblemParams(4, 1.0, 2.5, 0.0)


@pytest.fixture
def p41_crit():
    return ProblemParams(4, 1.0, 3.0, 0.2)


@pytest.fixture
def p5():
    """Second grid point: (5, 0.5) with q inside the multi-bump band (4/3, 7/3)."""
    return ProblemParams(5, 0.5, 2.2, 1.0)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


OMEGA3 = 2.0 * math.pi ** 2
