import math

import pytest

from hammercert.config import load_example
from hammercert.kernels import DerivativeKernel, ThreePointKernel, WeightFunction, unit_weight

E2 = math.e**2
EXAMPLE_M = (384 / (65 * E2), 768 / (155 * E2))
EXAMPLE_BIG_M = (384 / (37 * E2), 384 / (37 * E2))

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def example():
    return load_example()


@pytest.fixture(scope="session")
def example_problem(example):
    return example.problem


@pytest.fixture
def k1():
    return ThreePointKernel(-1.0, 0.5, (0.0, 0.25))


@pytest.fixture
def k2():
    return DerivativeKernel(0.25, 0.25, (0.0, 0.25))


@pytest.fixture
def g_example():
    return WeightFunction("e^2*(1 - t)^2")


@pytest.fixture
def unit():
    return unit_weight()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
