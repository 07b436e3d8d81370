import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from curverewire.graph import build_graph, is_connected

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def graphs(draw, min_n=1, max_n=12, connected=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if connected:
        # random spanning tree first, then extra edges
        tree = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
        extra = draw(st.lists(st.sampled_from(pairs), max_size=2 * n)) if pairs else []
        return build_graph(tree + extra, n)
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=3 * n)) if pairs else []
    return build_graph(chosen, n)


def random_connected(rng: np.random.Generator, n: int, p: float):
    while True:
        iu = np.triu_indices(n, 1)
        mask = rng.random(iu[0].shape[0]) < p
        g = build_graph(np.stack([iu[0][mask], iu[1][mask]], 1), n)
        if is_connected(g):
            return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance suite: each criterion registers one line, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
