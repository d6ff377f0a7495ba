import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from iterint import BasisSystem, TimeInterval  # noqa: E402

_ACCEPTANCE_LINES = []


@pytest.fixture
def unit():
    return TimeInterval(0.0, 1.0)


@pytest.fixture
def shifted():
    return TimeInterval(0.5, 2.0)


@pytest.fixture
def legendre_unit(unit):
    return BasisSystem("legendre", unit)


@pytest.fixture
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def log(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok
    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
