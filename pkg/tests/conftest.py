import numpy as np
import pytest

from ebsim import CavityParams, build_channel, ideal_channel

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def working_point():
    return CavityParams(g=2.4, kappa=1.0, kappa_s=0.0, gamma=0.1)


@pytest.fixture
def full_channel(working_point):
    return build_channel(working_point, 0.0)


@pytest.fixture
def ideal():
    return ideal_channel()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
