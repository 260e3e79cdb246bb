import pytest

_LINES = pytest.StashKey()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion; returns ``ok``."""

    def record(number, name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  [{number}] {name}" + (f"  ({detail})" if detail else "")
        request.config.stash[_LINES].append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
