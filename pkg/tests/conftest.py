import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ctdsat import _backend  # noqa: E402

BACKEND_NAMES = sorted(_backend.BACKENDS)


@pytest.fixture(params=BACKEND_NAMES)
def backend(request):
    return request.param


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""
    def report(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
