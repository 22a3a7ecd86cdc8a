import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    def record(result):
        ACCEPTANCE_LINES.append(result.line())
        print(result.line())
        return result

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
