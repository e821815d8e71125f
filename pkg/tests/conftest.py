import random
from pathlib import Path

import pytest

from metricsemigroup import extcore

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"


@pytest.fixture(autouse=True)
def debug_checks():
    # composition results are re-validated in tests
    old = extcore.DEBUG_CHECKS
    extcore.DEBUG_CHECKS = True
    yield
    extcore.DEBUG_CHECKS = old


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def fixtures():
    return FIXTURES


# (number, title, passed, seconds, detail) rows filled in by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, secs, detail in sorted(ACCEPTANCE):
        line = f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {title} ({secs:.2f}s)"
        if detail:
            line += f": {detail}"
        terminalreporter.write_line(line)
