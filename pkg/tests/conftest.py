import numpy as np
import pytest
from hypothesis import settings

from distortion_premium import EmpiricalDistribution

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# filled by test_acceptance, printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def four_points():
    return EmpiricalDistribution([1.0, 2.0, 3.0, 4.0])
