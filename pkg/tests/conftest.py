import os

import pytest

import _criteria

HERE = os.path.dirname(__file__)


@pytest.fixture
def vectors_path():
    return os.path.join(HERE, "data", "codec_vectors.txt")


def pytest_terminal_summary(terminalreporter):
    if _criteria.lines:
        terminalreporter.section("acceptance criteria")
        for line in _criteria.lines:
            terminalreporter.write_line(line)
