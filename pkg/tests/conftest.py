import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def criterion(request):
    """Call with (number, passed, summary); the line is echoed in the terminal summary."""
    lines = request.config.stash[_LINES]

    def record(number, passed, summary):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {summary}"
        lines.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
