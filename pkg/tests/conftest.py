import pytest

ACCEPTANCE_LINES = {}


def record_acceptance(criterion, passed, elapsed, limit, detail):
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES[criterion] = (f"criterion {criterion:2d}: {status}  ({elapsed:.1f}s / {limit}s)  {detail}")


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[c])
