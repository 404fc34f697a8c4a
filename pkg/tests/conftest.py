import random

import pytest
from hypothesis import settings, strategies as st

from permweyl.graph import Graph, bowtie, cuntz, golden_mean, validate

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_graph(rng: random.Random, max_vertices=4, max_edges=8) -> Graph:
    """Rejection-sample a valid graph (no sinks, no sources, every cycle has an exit)."""
    while True:
        n = rng.randint(1, max_vertices)
        m = rng.randint(n + 1, max(n + 1, max_edges))
        vs = [f"v{i}" for i in range(n)]
        edges = [(f"e{j}", rng.choice(vs), rng.choice(vs)) for j in range(m)]
        g = Graph(vs, edges)
        if validate(g).valid:
            return g


@st.composite
def graphs(draw, max_vertices=4, max_edges=8):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph(random.Random(seed), max_vertices, max_edges)


@pytest.fixture
def bt():
    return bowtie()


@pytest.fixture
def gm():
    return golden_mean()


@pytest.fixture
def o3():
    return cuntz(3)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append((n, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE, key=lambda t: t[0]):
            terminalreporter.write_line(line)
