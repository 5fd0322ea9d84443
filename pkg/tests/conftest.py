import numpy as np
import pytest

from jsrholder import MatrixSet

NILPOTENT = np.array([[0.0, 1.0], [0.0, 0.0]])
LOWER_UNIT = np.array([[0.0, 0.0], [1.0, 0.0]])
JORDAN_HALF = np.array([[0.5, 1.0], [0.0, 0.5]])


@pytest.fixture
def rank_one_pair():
    return MatrixSet([NILPOTENT, LOWER_UNIT])


@pytest.fixture
def nilpotent():
    return MatrixSet([NILPOTENT])


@pytest.fixture
def jordan_half():
    return MatrixSet([JORDAN_HALF])


def random_pair(rng, d=2):
    return MatrixSet([rng.normal(size=(d, d)) for _ in range(2)])


ACCEPTANCE_LINES = []


def report_criterion(number, ok, detail, seconds):
    """Record one acceptance line; all lines are printed in the terminal summary."""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  ({seconds:.2f}s)  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
