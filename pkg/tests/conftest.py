import numpy as np
import pytest

from airygap.asympt import IntervalConfig, solve_system

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def acceptance_log(request):
    """Append one PASS/FAIL line per criterion; shown in the terminal summary."""
    lines = request.config.stash[_LINES]

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sd_g1():
    return solve_system(IntervalConfig(1, (-1.0, -2.0)))


@pytest.fixture(scope="session")
def sd_g2():
    return solve_system(IntervalConfig(2, (-1.0, -2.0, -3.0, -4.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
