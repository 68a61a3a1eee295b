import shutil

import pytest
from helpers import FIXTURES, acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def workdir(tmp_path):
    """A scratch copy of the shipped fixtures, with config paths relative to it."""
    for name in ("config.json", "incidents.json", "trusted.txt", "reports_6.jsonl"):
        shutil.copy(FIXTURES / name, tmp_path / name)
    return tmp_path
