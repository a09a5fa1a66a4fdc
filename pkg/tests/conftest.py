import numpy as np
import pytest

from gptwin import EvolutionProfile, NominalSystem


@pytest.fixture
def nominal():
    return NominalSystem()


@pytest.fixture
def default_profile():
    return EvolutionProfile()


@pytest.fixture
def rng():
    return np.random.default_rng(20201103)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
