import math

import numpy as np
import pytest

from se2track import SimConfig, simulate

# Collected one-line results from the acceptance suite, echoed at the end
# of the pytest run so they are visible without -s.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


@pytest.fixture(scope="session")
def ellipse_desc():
    """The standard test scenario: 3x5 ellipse, one lap per 5 s."""
    return {"family": "ellipse", "a": 3.0, "b": 5.0, "h": 2.0 * math.pi / 5.0,
            "origin": [0.0, 0.0]}


@pytest.fixture(scope="session")
def offcenter_desc(ellipse_desc):
    return {**ellipse_desc, "origin": [3.0, 3.0]}


@pytest.fixture(scope="session")
def centered_log(ellipse_desc):
    """The centered-ellipse tracking run shared by several tests."""
    cfg = SimConfig(trajectory=ellipse_desc, controller="spatial",
                    offset=(3.0, -2.0, math.pi / 2.0), dt=1e-3, t_end=40.0)
    return simulate(cfg)


@pytest.fixture(scope="session")
def offcenter_log(offcenter_desc):
    cfg = SimConfig(trajectory=offcenter_desc, controller="spatial",
                    offset=(3.0, -2.0, math.pi / 2.0), dt=1e-3, t_end=40.0)
    return simulate(cfg)
