import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on ``ok``."""
    def record(number, ok, detail):
        _CRITERIA[number] = (ok, detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
