import pytest

ACCEPTANCE: dict = {}


@pytest.fixture
def verdict():
    """Record one acceptance line, then assert it."""
    def record(num: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE[num] = (title, bool(ok), detail)
        print(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {title} {detail}")
        assert ok, f"criterion {num} failed: {title} {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {title} {detail}")
