import numpy as np
import pytest

from mvlab import DEFAULT_MORSE, HegselmannKrause, make_grid, periodize_on_grid


@pytest.fixture(scope="session")
def grid():
    return make_grid(5.0, 512)


@pytest.fixture(scope="session")
def morse_table(grid):
    return periodize_on_grid(DEFAULT_MORSE, grid)


@pytest.fixture(scope="session")
def hk_table(grid):
    return periodize_on_grid(HegselmannKrause(0.5), grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the acceptance report, then assert."""

    def record(label: str, passed: bool, detail: str = ""):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        _CRITERIA.append(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
