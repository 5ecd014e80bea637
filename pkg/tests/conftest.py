import pytest

ACCEPTANCE = []


@pytest.fixture
def verdict(capsys):
    """Print a PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
        ACCEPTANCE.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
