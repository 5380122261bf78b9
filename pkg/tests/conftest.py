import pytest

_LINES: dict[int, tuple[str, list[str]]] = {}


@pytest.fixture
def acceptance_lines():
    return _LINES


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    tr = terminalreporter
    tr.section("acceptance")
    for k in sorted(_LINES):
        head, details = _LINES[k]
        tr.write_line(head)
        for d in details:
            tr.write_line("    " + d)
