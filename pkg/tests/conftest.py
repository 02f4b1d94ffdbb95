import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line, then fail the test if needed."""

    def report(name: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}"
        _LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
