import numpy as np
import pytest

from hybridmem.placement import GridDims
from hybridmem.techlib import default_library
from hybridmem.workload import AccessMatrix

ACCEPTANCE_LINES = []


def matrix(grid, cores=1, cells=None):
    """AccessMatrix with {(x, y): (reads, writes)} placed on core 0."""
    cx, cy = grid
    reads = np.zeros((cores, cx, cy), dtype=np.int64)
    writes = np.zeros((cores, cx, cy), dtype=np.int64)
    for (x, y), (r, w) in (cells or {}).items():
        reads[0, x, y] = r
        writes[0, x, y] = w
    return AccessMatrix(reads, writes)


@pytest.fixture
def lib():
    return default_library()


@pytest.fixture
def grid4():
    return GridDims(4, 4)


@pytest.fixture
def idle16():
    return AccessMatrix.zeros(16, (4, 4))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
