import numpy as np
import pytest

import acceptance_log
from nlsmkdv.potentials import make_trig
from nlsmkdv.verify import load_corpus


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def corpus():
    """The 20 bundled seeded real trigonometric potentials, as ``(name, u)`` pairs."""
    return load_corpus()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def cosine():
    """``0.5 cos(2 pi x)``."""
    return make_trig({1: 0.25, -1: 0.25}).as_real()
