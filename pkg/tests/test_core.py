from __future__ import annotations

import hashlib
import random
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs
from graphsim.core import (
    LABEL_FIELD,
    EdgeRecord,
    NodeRecord,
    Predicate,
    PropertyGraph,
    canonical_json,
    eval_predicate,
    induced_subgraph,
    load_snapshot,
    dump_snapshot,
    state_hash,
    to_value,
)
from graphsim.errors import Conflict, InvalidArgument, NotFound, ValidationError


def test_numbers_are_exact_decimals():
    assert to_value(100) * to_value(1.12) == Decimal("112")
    assert canonical_json({"b": Decimal("1.50"), "a": -0.0}) == '{"a":0,"b":1.5}'
    with pytest.raises(InvalidArgument):
        to_value(float("nan"))
    with pytest.raises(InvalidArgument):
        to_value(float("inf"))
    with pytest.raises(InvalidArgument):
        to_value("\ud800")


class TestPredicates:
    def test_ne_on_compliant_node_is_false(self):
        node = NodeRecord("Dept_Finance", "Department", {"ijudgemethod": "1"})
        assert not eval_predicate(node, Predicate.parse("ijudgemethod", {"op": "ne", "value": "1"}))

    def test_exists_false_on_absent_property(self):
        assert eval_predicate(NodeRecord("n"), Predicate.parse("x", {"op": "exists", "value": False}))
        assert not eval_predicate(NodeRecord("n"), Predicate.parse("x", {"op": "exists", "value": True}))

    def test_gt(self):
        assert eval_predicate(NodeRecord("n", properties={"w": to_value(5)}), Predicate.parse("w", {"op": "gt", "value": 3}))

    @pytest.mark.parametrize("op", ["eq", "ne", "gt", "ge", "lt", "le", "in"])
    def test_absent_property_is_false(self, op):
        value = [1] if op == "in" else 1
        assert not eval_predicate(NodeRecord("n"), Predicate.parse("x", {"op": op, "value": value}))

    def test_numeric_op_on_text_is_false_with_diagnostic(self):
        diags: list[str] = []
        assert not eval_predicate(NodeRecord("n", properties={"w": "big"}), Predicate.parse("w", {"op": "gt", "value": 1}), diags)
        assert len(diags) == 1 and "'w'" in diags[0]

    def test_no_cross_type_equality(self):
        node = NodeRecord("n", properties={"a": "1", "b": True})
        assert not eval_predicate(node, Predicate.parse("a", 1))
        assert not eval_predicate(node, Predicate.parse("b", 1))
        assert eval_predicate(node, Predicate.parse("a", "1"))

    def test_label_token(self):
        assert eval_predicate(NodeRecord("n", "AuditorRole"), Predicate.parse(LABEL_FIELD, "AuditorRole"))

    @pytest.mark.parametrize("spec", [
        {"op": "gt", "value": "3"},
        {"op": "in", "value": []},
        {"op": "exists", "value": 1},
        {"op": "like", "value": "x"},
        {"op": "eq"},
    ])
    def test_malformed(self, spec):
        with pytest.raises(InvalidArgument):
            Predicate.parse("f", spec)


class TestGraph:
    def test_duplicate_node_and_edge(self):
        g = PropertyGraph.build("ab", [("a", "b")])
        with pytest.raises(Conflict):
            g.add_node(NodeRecord("a"))
        with pytest.raises(Conflict):
            g.add_edge(EdgeRecord("a", "b", "LINK"))
        g.add_edge(EdgeRecord("a", "b", "OTHER"))
        with pytest.raises(NotFound):
            g.add_edge(EdgeRecord("a", "zz", "LINK"))

    def test_self_loop_counts_twice(self):
        g = PropertyGraph.build("a", [("a", "a")])
        assert g.degree("a") == 2
        assert g.undirected_neighbors("a") == set()

    def test_from_dict_collects_all_violations(self):
        doc = {
            "nodes": [{"name": "a"}, {"name": "a"}, {"name": ""}],
            "edges": [{"source": "a", "target": "ghost", "rel_type": "L"}, {"source": "a", "target": "a", "rel_type": "L", "weight": -1}],
        }
        with pytest.raises(ValidationError) as info:
            PropertyGraph.from_dict(doc)
        assert len(info.value.violations) == 4

    def test_snapshot_roundtrip(self, tmp_path, approval_graph):
        p = tmp_path / "g.json"
        dump_snapshot(approval_graph, p)
        assert state_hash(load_snapshot(p)) == state_hash(approval_graph)


class TestInducedSubgraph:
    def test_bridge_removed(self, chain):
        sub = induced_subgraph(chain, {"a", "c"})
        assert sorted(sub.nodes) == ["a", "c"] and not sub.edges

    def test_identity(self, approval_graph):
        assert induced_subgraph(approval_graph, approval_graph.nodes) == approval_graph

    def test_fixture_survivors(self, approval_graph):
        keep = {n for n, r in approval_graph.nodes.items() if r.properties["ijudgemethod"] == "1"}
        sub = induced_subgraph(approval_graph, keep)
        assert (len(sub.nodes), len(sub.edges)) == (14, 19)

    def test_unknown_name(self, chain):
        with pytest.raises(InvalidArgument):
            induced_subgraph(chain, {"a", "zz"})

    @given(graphs(), st.data())
    def test_exact_law_and_idempotence(self, g, data):
        keep = data.draw(st.sets(st.sampled_from(sorted(g.nodes)))) if g.nodes else set()
        sub = induced_subgraph(g, keep)
        assert set(sub.nodes) == keep
        expected = {k for k, e in g.edges.items() if e.source in keep and e.target in keep}
        assert set(sub.edges) == expected
        assert induced_subgraph(sub, keep) == sub
        assert not sub.integrity_violations()


class TestStateHash:
    def test_empty_graph_digest(self):
        expected = hashlib.sha256(b'{"edges":[],"nodes":[]}').hexdigest()
        assert state_hash(PropertyGraph()).hex() == expected
        assert len(state_hash(PropertyGraph()).digest) == 32

    def test_insertion_order(self):
        edges = [("a", "b", "L", 1), ("b", "c", "L", 2), ("c", "a", "M", None)]
        g1 = PropertyGraph.build("abc", edges)
        g2 = PropertyGraph.build("cab", list(reversed(edges)))
        assert state_hash(g1) == state_hash(g2)

    def test_weight_change(self):
        g1 = PropertyGraph.build("ab", [("a", "b", "L", 1)])
        g2 = PropertyGraph.build("ab", [("a", "b", "L", 2)])
        assert state_hash(g1) != state_hash(g2)

    def test_number_formatting_does_not_matter(self):
        g1 = PropertyGraph.build("ab", [("a", "b", "L", Decimal("2.50"))])
        g2 = PropertyGraph.build("ab", [("a", "b", "L", 2.5)])
        assert state_hash(g1) == state_hash(g2)

    @given(graphs(), st.randoms(use_true_random=False))
    def test_permutation_invariant(self, g, rng: random.Random):
        nodes = list(g.nodes.values())
        edges = list(g.edges.values())
        rng.shuffle(nodes)
        rng.shuffle(edges)
        h = PropertyGraph.build([n.copy() for n in nodes], [e.copy() for e in edges])
        assert state_hash(h) == state_hash(g)
