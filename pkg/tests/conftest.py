import numpy as np
import pytest

from infpath.graph import from_edges


def line(n):
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(k):
    return from_edges(k + 1, [(0, i) for i in range(1, k + 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for text in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(text)
