import pytest

from bnlab import branch
from bnlab.critical import lambda_bar
from bnlab.linear6 import solve_v0

_SWEEPS = {}
ACCEPTANCE_LINES = []


def default_sweep(N: int, m: int = 2):
    if (N, m) not in _SWEEPS:
        _SWEEPS[N, m] = branch.sweep(N, m, branch.default_a_grid(N))
    return _SWEEPS[N, m]


@pytest.fixture(scope="session")
def sweeps():
    return default_sweep


@pytest.fixture(scope="session")
def critical6():
    return lambda_bar(6, 2)


@pytest.fixture(scope="session")
def linearized6(critical6):
    return solve_v0(critical6)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
