"""Matching, mutation and retrieval operations over a working graph.

Each function takes the graph followed by the call's keyword arguments and
returns a payload dict. Mutating functions validate the whole batch before
touching the graph; the sandbox additionally runs them on a copy, so a raised
error always leaves the session state unchanged.
"""

from __future__ import annotations

from decimal import Decimal
from typing import Any, Iterable, Mapping, Sequence

from graphsim.core import (
    EdgeKey,
    NodeRecord,
    PropertyGraph,
    check_value,
    edge_from_dict,
    eval_predicate,
    format_decimal,
    key_dict,
    node_from_dict,
    parse_predicates,
    to_value,
    to_weight,
    _MISSING,
)
from graphsim.errors import Conflict, InvalidArgument, NotFound

WEIGHT_OPS = ("set", "scale", "add")


def _require_nodes(graph: PropertyGraph, names: Iterable[str]) -> None:
    missing = sorted({n for n in names if n not in graph.nodes})
    if missing:
        raise NotFound(f"node(s) not found: {', '.join(missing)}", names=missing)


def _require_node(graph: PropertyGraph, name: str) -> NodeRecord:
    node = graph.nodes.get(name)
    if node is None:
        raise NotFound(f"node not found: {name}", names=[name])
    return node


def select_edges(graph: PropertyGraph, selectors: Sequence[Mapping[str, Any]]) -> list[EdgeKey]:
    """Resolve ``{source, target, rel_type?}`` selectors; each must match at least one edge."""
    chosen: set[EdgeKey] = set()
    unmatched = []
    for sel in selectors:
        source, target = sel["source"], sel["target"]
        rel_type = sel.get("rel_type")
        if rel_type is None:
            keys = [e.key for e in graph.edges_between(source, target)] if source in graph.nodes else []
        else:
            key = (source, target, rel_type)
            keys = [key] if key in graph.edges else []
        if not keys:
            unmatched.append({k: v for k, v in sel.items() if k in ("source", "target", "rel_type")})
        chosen.update(keys)
    if unmatched:
        raise NotFound(f"{len(unmatched)} edge selector(s) matched nothing", selectors=unmatched)
    return sorted(chosen)


def _props(raw: Mapping[str, Any] | None) -> dict[str, Any]:
    if not raw:
        return {}
    return {str(k): to_value(v) for k, v in raw.items()}


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------


def match_nodes(graph: PropertyGraph, label: str | None = None, properties: Mapping[str, Any] | None = None) -> dict:
    preds = parse_predicates(properties)
    diagnostics: list[str] = []
    names = []
    for name in sorted(graph.nodes):
        node = graph.nodes[name]
        if label is not None and node.label != label:
            continue
        # evaluate every predicate so diagnostics are complete
        verdicts = [eval_predicate(node, p, diagnostics) for p in preds]
        if all(verdicts):
            names.append(name)
    payload: dict[str, Any] = {"nodes": names, "count": len(names)}
    if diagnostics:
        payload["diagnostics"] = diagnostics
    return payload


def match_edges(
    graph: PropertyGraph,
    source: str | None = None,
    target: str | None = None,
    rel_type: str | None = None,
    properties: Mapping[str, Any] | None = None,
    weight: Any = None,
) -> dict:
    preds = parse_predicates(properties)
    weight_pred = parse_predicates({"weight": weight})[0] if weight is not None else None
    diagnostics: list[str] = []
    keys = []
    for edge in graph.sorted_edges():
        if source is not None and edge.source != source:
            continue
        if target is not None and edge.target != target:
            continue
        if rel_type is not None and edge.rel_type != rel_type:
            continue
        subject = f"{edge.source}->{edge.target}"
        ok = all([check_value(edge.properties.get(p.field, _MISSING), p, subject, diagnostics) for p in preds])
        if ok and weight_pred is not None:
            actual = edge.weight if edge.weight is not None else _MISSING
            ok = check_value(actual, weight_pred, subject, diagnostics)
        if ok:
            keys.append(key_dict(edge.key))
    payload: dict[str, Any] = {"edges": keys, "count": len(keys)}
    if diagnostics:
        payload["diagnostics"] = diagnostics
    return payload


# ---------------------------------------------------------------------------
# node mutation
# ---------------------------------------------------------------------------


def create_nodes(graph: PropertyGraph, nodes: Sequence[Mapping[str, Any]]) -> dict:
    records = [node_from_dict(doc) for doc in nodes]
    seen: set[str] = set()
    dupes = set()
    for rec in records:
        if rec.name in seen or rec.name in graph.nodes:
            dupes.add(rec.name)
        seen.add(rec.name)
    if dupes:
        raise Conflict(f"node name(s) already exist: {', '.join(sorted(dupes))}", names=sorted(dupes))
    for rec in records:
        graph.add_node(rec)
    return {"created": {"nodes": [r.name for r in records]}, "count": len(records)}


def delete_nodes(graph: PropertyGraph, node_names: Sequence[str]) -> dict:
    names = sorted(set(node_names))
    _require_nodes(graph, names)
    removed: set[EdgeKey] = set()
    for name in names:
        removed.update(graph.remove_node(name))
    return {"deleted_nodes": len(names), "deleted_edges": len(removed), "nodes": names}


def update_nodes(graph: PropertyGraph, node_names: Sequence[str], set: Mapping[str, Any] | None = None) -> dict:
    names = sorted({*node_names})
    _require_nodes(graph, names)
    updates = _props(set)
    for name in names:
        graph.nodes[name].properties.update(updates)
    return {"updated": len(names)}


# ---------------------------------------------------------------------------
# edge mutation
# ---------------------------------------------------------------------------


def create_edges(graph: PropertyGraph, edges: Sequence[Mapping[str, Any]]) -> dict:
    records = [edge_from_dict(doc) for doc in edges]
    missing = sorted({n for r in records for n in (r.source, r.target) if n not in graph.nodes})
    if missing:
        raise NotFound(f"edge endpoint(s) not found: {', '.join(missing)}", names=missing)
    seen: set[EdgeKey] = set()
    dupes = []
    for rec in records:
        if rec.key in seen or rec.key in graph.edges:
            dupes.append(key_dict(rec.key))
        seen.add(rec.key)
    if dupes:
        raise Conflict(f"{len(dupes)} edge(s) already exist", edges=dupes)
    for rec in records:
        graph.add_edge(rec)
    return {"created": {"edges": [key_dict(r.key) for r in records]}, "count": len(records)}


def delete_edges(graph: PropertyGraph, edges: Sequence[Mapping[str, Any]]) -> dict:
    keys = select_edges(graph, edges)
    for key in keys:
        graph.remove_edge(key)
    return {"deleted": len(keys), "edges": [key_dict(k) for k in keys]}


def apply_weight_transform(current: Decimal | None, transform: Mapping[str, Any], key: EdgeKey) -> Decimal:
    op = transform["op"]
    if op not in WEIGHT_OPS:
        raise InvalidArgument(f"unknown weight transform {op!r}")
    value = to_value(transform["value"])
    if not isinstance(value, Decimal):
        raise InvalidArgument("weight transform value must be a number")
    if op == "set":
        result = value
    else:
        if current is None:
            raise InvalidArgument(f"cannot {op} missing weight on {key[0]}->{key[1]} ({key[2]})")
        result = current * value if op == "scale" else current + value
    if result < 0:
        raise InvalidArgument(
            f"weight transform yields negative weight {format_decimal(result)} on {key[0]}->{key[1]} ({key[2]})"
        )
    return result


def update_edges(
    graph: PropertyGraph,
    edges: Sequence[Mapping[str, Any]],
    set: Mapping[str, Any] | None = None,
    weight: Mapping[str, Any] | None = None,
) -> dict:
    keys = select_edges(graph, edges)
    updates = _props(set)
    new_weights = {k: apply_weight_transform(graph.edges[k].weight, weight, k) for k in keys} if weight else {}
    for key in keys:
        edge = graph.edges[key]
        edge.properties.update(updates)
        if key in new_weights:
            edge.weight = new_weights[key]
    return {"updated": len(keys)}


def set_edge_weights(graph: PropertyGraph, assignments: Sequence[Mapping[str, Any]]) -> dict:
    planned: dict[EdgeKey, Decimal] = {}
    for a in assignments:
        w = to_weight(a["weight"])
        for key in select_edges(graph, [a]):
            planned[key] = w
    for key, w in planned.items():
        graph.edges[key].weight = w
    return {"updated": len(planned)}


# ---------------------------------------------------------------------------
# retrieval
# ---------------------------------------------------------------------------


def get_node_info(graph: PropertyGraph, name: str) -> dict:
    node = _require_node(graph, name)
    return {"node": node.to_dict()}


def get_graph_info(graph: PropertyGraph) -> dict:
    return {
        "node_count": len(graph.nodes),
        "edge_count": len(graph.edges),
        "max_degree": graph.max_degree(),
        "nodes": [graph.nodes[n].to_dict() for n in sorted(graph.nodes)],
        "edges": [e.to_dict() for e in graph.sorted_edges()],
    }


def get_node_neighbors(graph: PropertyGraph, name: str, direction: str = "out") -> dict:
    _require_node(graph, name)
    if direction == "out":
        found = graph.successors(name)
    elif direction == "in":
        found = graph.predecessors(name)
    elif direction == "both":
        found = sorted(set(graph.successors(name)) | set(graph.predecessors(name)))
    else:
        raise InvalidArgument(f"direction must be out, in or both, got {direction!r}")
    return {"neighbors": found, "direction": direction}

