from __future__ import annotations

import sys
from decimal import Decimal
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from graphsim.core import EdgeRecord, NodeRecord, PropertyGraph  # noqa: E402
from graphsim.demo import fixture_graph  # noqa: E402
from graphsim.sandbox import Sandbox  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

NAMES = list("abcdefgh")

values = st.one_of(
    st.text(alphabet="xyz01", max_size=3),
    st.integers(-5, 5),
    st.booleans(),
    st.decimals(min_value=-10, max_value=10, places=2, allow_nan=False, allow_infinity=False),
)


@st.composite
def graphs(draw, max_nodes=8, weighted=None):
    names = draw(st.lists(st.sampled_from(NAMES), unique=True, max_size=max_nodes))
    g = PropertyGraph()
    for n in names:
        props = draw(st.dictionaries(st.sampled_from(["k", "w", "tag"]), values, max_size=3))
        g.add_node(NodeRecord(n, draw(st.sampled_from(["", "L", "R"])), props))
    if names:
        keys = draw(st.lists(
            st.tuples(st.sampled_from(names), st.sampled_from(names), st.sampled_from(["LINK", "ALT"])),
            unique=True, max_size=16,
        ))
        for s, t, rel in keys:
            has_w = draw(st.booleans()) if weighted is None else weighted
            w = draw(st.integers(0, 9)) if has_w else None
            g.add_edge(EdgeRecord(s, t, rel, None if w is None else Decimal(w)))
    return g


@pytest.fixture
def approval_graph() -> PropertyGraph:
    return fixture_graph("approval_routing")


@pytest.fixture
def audit_graph() -> PropertyGraph:
    return fixture_graph("audit_conflicts")


@pytest.fixture
def sandbox() -> Sandbox:
    return Sandbox()


@pytest.fixture
def chain() -> PropertyGraph:
    return PropertyGraph.build("abc", [("a", "b"), ("b", "c")])
