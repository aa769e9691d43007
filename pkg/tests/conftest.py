import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--input",
        action="store",
        default=None,
        help="real benchmark CSV for the conditional end-to-end accuracy check",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    status = "PASS" if passed is True else "FAIL" if passed is False else str(passed)
    line = f"criterion {number}: {status} - {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
