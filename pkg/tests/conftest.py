import io

import pytest

from comwalk import Graph, load_edge_list

import verdicts

BARBELL_EDGES = "0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n2 3\n"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if verdicts.LINES:
        terminalreporter.section("acceptance criteria")
        for line in verdicts.LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def triangle():
    return Graph.from_pairs([(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def barbell():
    """Two unit triangles {0,1,2} and {3,4,5} joined by the edge (2,3)."""
    return load_edge_list(io.StringIO(BARBELL_EDGES))


@pytest.fixture
def two_triangles():
    return Graph.from_pairs([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


@pytest.fixture
def k4():
    return Graph.from_pairs([(i, j) for i in range(4) for j in range(i + 1, 4)])


@pytest.fixture
def k10():
    return Graph.from_pairs([(i, j) for i in range(10)
                             for j in range(i + 1, 10)])
