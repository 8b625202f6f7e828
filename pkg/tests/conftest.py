import os

import numpy as np
import pytest

from crscat.units import CONST, CR52

# pin single-threaded evaluation for the determinism tests
os.environ.setdefault("CRSCAT_THREADS", "1")

A0 = CONST.a0
C6 = 1050.0 * CONST.c6_au
UK = 1e-6


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tuned170():
    from crscat.figures import tuned_potential

    return tuned_potential(170 * A0, CR52)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
