import pytest

ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def verdict(request):
    """Record a one-line acceptance verdict; the test still asserts on its own."""
    def record(name: str, ok: bool, detail: str):
        ACCEPTANCE[name] = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        print(ACCEPTANCE[name])
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
