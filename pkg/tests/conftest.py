import pytest

_KEY = "klocal_acceptance"


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(label, ok, detail)``."""
    lines = request.config.__dict__.setdefault(_KEY, [])

    def record(label: str, ok: bool, detail: str = "") -> bool:
        lines.append(f"criterion {label}: {'PASS' if ok else 'FAIL'}{'  ' + detail if detail else ''}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get(_KEY)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
