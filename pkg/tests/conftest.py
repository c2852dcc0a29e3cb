from __future__ import annotations

import pytest
from hypothesis import strategies as st

from kdpmac import example
from kdpmac.hierarchy import Hierarchy
from kdpmac.keyderive import Rule
from kdpmac.provisioning import make_bundles
from kdpmac.scheme import build_scheme

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def fig1() -> Hierarchy:
    return example.fig1_hierarchy()


@pytest.fixture
def paper_scheme(fig1):
    return build_scheme(fig1, example.SIZES, 1, material=example.material())


@pytest.fixture
def paper_bundles(paper_scheme):
    s = paper_scheme
    return make_bundles(s.hierarchy, s.family, s.ssets, s.material, s.matrix)


DIAMOND = Hierarchy.from_edges(4, [(1, 2), (1, 3), (2, 4), (3, 4)])


@st.composite
def hierarchies(draw, max_users: int = 12, tree: bool = False) -> Hierarchy:
    """Random forest or DAG, relabelled so ids carry no order information."""
    m = draw(st.integers(1, max_users))
    edges = set()
    for b in range(1, m):
        if tree:
            parent = draw(st.integers(-1, b - 1))
            if parent >= 0:
                edges.add((parent, b))
        else:
            for a in draw(st.sets(st.integers(0, b - 1), max_size=3)) if b else ():
                edges.add((a, b))
    perm = draw(st.permutations(range(1, m + 1)))
    return Hierarchy(m, frozenset((perm[a], perm[b]) for a, b in edges))


@st.composite
def schemes(draw, max_users: int = 12, tree: bool = False, rule: Rule = Rule.CONTAINMENT):
    h = draw(hierarchies(max_users, tree))
    sizes = draw(st.lists(st.integers(1, 3), min_size=h.user_count, max_size=h.user_count))
    seed = draw(st.binary(min_size=1, max_size=8))
    return build_scheme(h, sizes, key_len=8, seed=seed, rule=rule)
