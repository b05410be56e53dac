import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record ``(number, ok, detail)`` for the acceptance summary."""

    def record(number, ok, detail):
        ACCEPTANCE[str(number)] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    def order(key):
        head = key.split("[")[0]
        return int(head), key

    for number in sorted(ACCEPTANCE, key=order):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")
