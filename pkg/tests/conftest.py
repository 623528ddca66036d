import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from localdeg.graph import from_edges

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def path_graph(n_vertices: int):
    return from_edges(n_vertices, [(i, i + 1) for i in range(n_vertices - 1)])


def random_graph(rng: np.random.Generator, n_vertices: int, p: float, directed: bool = False):
    a = rng.random((n_vertices, n_vertices)) < p
    np.fill_diagonal(a, False)
    if not directed:
        a = np.triu(a, 1)
    return from_edges(n_vertices, np.argwhere(a), directed=directed)


@st.composite
def graphs(draw, max_vertices: int = 30, directed: bool | None = None):
    """Small random graphs from an explicit edge list."""
    n = draw(st.integers(1, max_vertices))
    is_directed = draw(st.booleans()) if directed is None else directed
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j and (is_directed or i < j)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=3 * n)) if pairs else []
    return from_edges(n, chosen, directed=is_directed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERIA: list[str] = []


@pytest.fixture
def criterion(capsys):
    """Print and collect one PASS/FAIL line per acceptance check."""

    def report(name: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}"
        CRITERIA.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
