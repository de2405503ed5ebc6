import functools

import pytest

from stabmaxwell import CoefficientField, build_structured_mesh


@functools.lru_cache(maxsize=None)
def mesh_at(level):
    return build_structured_mesh(level)


@pytest.fixture
def mesh3():
    return mesh_at(3)


@pytest.fixture
def field6():
    return CoefficientField(m=6)


@pytest.fixture
def vacuum():
    return CoefficientField.vacuum()


# one line per acceptance criterion, replayed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
