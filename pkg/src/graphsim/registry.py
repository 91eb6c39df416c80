"""Operation registry: function-calling schemas, argument validation and dispatch.

The same validator backs ``Sandbox.call`` and the HTTP service, so anything
accepted on the wire is exactly what the sandbox executes and logs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Mapping

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from graphsim import algorithms, ops
from graphsim.core import PREDICATE_OPS, PropertyGraph, plain
from graphsim.errors import GraphSimError, InvalidArgument, UnknownOperation

_VALUE = {"type": ["string", "number", "boolean"]}
_PREDICATE = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"op": {"enum": list(PREDICATE_OPS)}, "value": {}},
            "required": ["op", "value"],
            "additionalProperties": False,
        },
        _VALUE,
    ]
}
_PREDICATES = {"type": "object", "additionalProperties": _PREDICATE,
               "description": "property name -> predicate {op, value}; a bare value means eq"}
_NODE_FIELDS = {
    "name": {"type": "string", "minLength": 1},
    "label": {"type": "string"},
    "properties": {"type": "object", "additionalProperties": _VALUE},
}
_NODE = {"type": "object", "properties": _NODE_FIELDS, "required": ["name"], "additionalProperties": False}
_EDGE_FIELDS = {
    "source": {"type": "string", "minLength": 1},
    "target": {"type": "string", "minLength": 1},
    "rel_type": {"type": "string"},
    "weight": {"type": "number", "minimum": 0},
    "properties": {"type": "object", "additionalProperties": _VALUE},
}
_EDGE = {"type": "object", "properties": _EDGE_FIELDS, "required": ["source", "target", "rel_type"],
         "additionalProperties": False}
_SELECTOR = {
    "type": "object",
    "properties": {"source": {"type": "string"}, "target": {"type": "string"}, "rel_type": {"type": "string"}},
    "required": ["source", "target"],
    "additionalProperties": False,
}
_WEIGHT_TRANSFORM = {
    "type": "object",
    "properties": {"op": {"enum": list(ops.WEIGHT_OPS)}, "value": {"type": "number"}},
    "required": ["op", "value"],
    "additionalProperties": False,
}
_NAME = {"type": "string"}
_NAMES = {"type": "array", "items": {"type": "string"}}
_GRAPH_ID = {"type": "string", "description": "routing key of the sandbox session"}


@dataclass(frozen=True)
class Operation:
    name: str
    family: str
    description: str
    properties: Mapping[str, Any]
    required: tuple[str, ...] = ()
    fn: Callable[..., dict] | None = None
    mutates: bool = False
    alias_of: str | None = None

    def schema(self) -> dict[str, Any]:
        doc = {
            "name": self.name,
            "description": self.description,
            "parameters": {
                "type": "object",
                "properties": {"graph_id": _GRAPH_ID, **self.properties},
                "required": ["graph_id", *self.required],
                "additionalProperties": False,
            },
        }
        if self.alias_of:
            doc["alias_of"] = self.alias_of
        return doc


_OPERATIONS = [
    Operation("match_nodes", "matching", "Names of nodes satisfying every predicate (conjunction), sorted.",
              {"label": _NAME, "properties": _PREDICATES}, (), ops.match_nodes),
    Operation("match_edges", "matching", "Keys of edges satisfying every filter, sorted by (source, target, rel_type).",
              {"source": _NAME, "target": _NAME, "rel_type": _NAME, "properties": _PREDICATES, "weight": _PREDICATE},
              (), ops.match_edges),
    Operation("create_nodes", "mutation", "Create a batch of nodes atomically.",
              {"nodes": {"type": "array", "items": _NODE}}, ("nodes",), ops.create_nodes, True),
    Operation("create_node", "mutation", "Create one node (alias of create_nodes).",
              _NODE_FIELDS, ("name",), None, True, "create_nodes"),
    Operation("delete_nodes", "mutation", "Delete nodes and all incident edges atomically.",
              {"node_names": _NAMES}, ("node_names",), ops.delete_nodes, True),
    Operation("update_nodes", "mutation", "Set or overwrite properties on the named nodes.",
              {"node_names": _NAMES, "set": {"type": "object", "additionalProperties": _VALUE}},
              ("node_names",), ops.update_nodes, True),
    Operation("create_edges", "mutation", "Create a batch of edges atomically.",
              {"edges": {"type": "array", "items": _EDGE}}, ("edges",), ops.create_edges, True),
    Operation("create_edge", "mutation", "Create one edge (alias of create_edges).",
              _EDGE_FIELDS, ("source", "target", "rel_type"), None, True, "create_edges"),
    Operation("delete_edges", "mutation", "Delete edges by selector; omitting rel_type removes every edge of the pair.",
              {"edges": {"type": "array", "items": _SELECTOR}}, ("edges",), ops.delete_edges, True),
    Operation("update_edges", "mutation", "Merge properties into selected edges and optionally transform weights.",
              {"edges": {"type": "array", "items": _SELECTOR},
               "set": {"type": "object", "additionalProperties": _VALUE}, "weight": _WEIGHT_TRANSFORM},
              ("edges",), ops.update_edges, True),
    Operation("set_edge_weights", "mutation", "Assign absolute weights to selected edges.",
              {"assignments": {"type": "array", "items": {
                  "type": "object",
                  "properties": {**_SELECTOR["properties"], "weight": {"type": "number"}},
                  "required": ["source", "target", "weight"], "additionalProperties": False}}},
              ("assignments",), ops.set_edge_weights, True),
    Operation("get_node_info", "retrieval", "Full record of one node.", {"name": _NAME}, ("name",), ops.get_node_info),
    Operation("get_graph_info", "retrieval", "Counts, max degree and the full sorted node and edge lists.",
              {}, (), ops.get_graph_info),
    Operation("get_node_neighbors", "retrieval", "Sorted neighbor names in the given direction.",
              {"name": _NAME, "direction": {"enum": ["out", "in", "both"]}}, ("name",), ops.get_node_neighbors),
    Operation("shortest_path", "path", "Directed shortest path (hops, or weight sum when every edge is weighted).",
              {"source": _NAME, "target": _NAME, "weighted": {"enum": [True, False, "auto"]}},
              ("source", "target"), algorithms.shortest_path),
    Operation("check_graph_connectivity", "path",
              "Directed reachability for a source/target pair, or weak connectivity of the whole graph.",
              {"source": _NAME, "target": _NAME}, (), algorithms.check_graph_connectivity),
    Operation("check_direct_edge", "path", "Whether an edge source->target exists (optionally of a rel_type).",
              {"source": _NAME, "target": _NAME, "rel_type": _NAME}, ("source", "target"),
              algorithms.check_direct_edge),
    Operation("analyze_graph_node", "path", "Degree summary of one node.", {"name": _NAME}, ("name",),
              algorithms.analyze_graph_node),
    Operation("calculate_max_matching", "algorithm",
              "Maximum bipartite matching between two node labels (direction ignored).",
              {"left_label": _NAME, "right_label": _NAME}, ("left_label", "right_label"),
              algorithms.calculate_max_matching),
    Operation("calculate_max_flow", "algorithm", "Maximum source-sink flow using edge weights as capacities.",
              {"source": _NAME, "sink": _NAME}, ("source", "sink"), algorithms.calculate_max_flow),
]

OPERATIONS: dict[str, Operation] = {op.name: op for op in _OPERATIONS}
ALIASES = {op.name: op.alias_of for op in _OPERATIONS if op.alias_of}
MUTATING = frozenset(op.name for op in _OPERATIONS if op.mutates)


def export_schemas() -> list[dict[str, Any]]:
    return [op.schema() for op in _OPERATIONS]


def canonical_name(name: str) -> str:
    return ALIASES.get(name, name)


@lru_cache(maxsize=None)
def _validator(name: str, require_graph_id: bool) -> Draft202012Validator:
    schema = OPERATIONS[name].schema()["parameters"]
    if not require_graph_id:
        schema = dict(schema, required=[r for r in schema["required"] if r != "graph_id"])
    return Draft202012Validator(schema)


def validate_arguments(name: str, arguments: Mapping[str, Any], require_graph_id: bool = False) -> None:
    if name not in OPERATIONS:
        raise UnknownOperation(f"unknown operation: {name}", name=name)
    error = best_match(_validator(name, require_graph_id).iter_errors(arguments))
    if error is not None:
        where = "/".join(str(p) for p in error.absolute_path) or "(root)"
        raise InvalidArgument(f"{name}: {where}: {error.message}")


def normalize_call(name: str, arguments: Mapping[str, Any]) -> tuple[str, dict[str, Any]]:
    """Validate a call and rewrite singular aliases into their batch form."""
    validate_arguments(name, arguments)
    args = dict(arguments)
    args.pop("graph_id", None)
    if name == "create_node":
        return "create_nodes", {"nodes": [args]}
    if name == "create_edge":
        return "create_edges", {"edges": [args]}
    return name, args


def execute(graph: PropertyGraph, name: str, arguments: Mapping[str, Any]) -> tuple[PropertyGraph, str, dict, dict]:
    """Run one call atomically.

    Returns ``(graph_after, logged_name, logged_args, result)``; on any error the
    input graph is returned untouched with an error-shaped result.
    """
    arguments = plain(dict(arguments))
    arguments.pop("graph_id", None)
    try:
        name, arguments = normalize_call(name, arguments)
    except GraphSimError as exc:
        return graph, name, arguments, exc.to_result()
    op = OPERATIONS[name]
    try:
        if op.mutates:
            work = graph.copy()
            payload = op.fn(work, **arguments)
        else:
            work = graph
            payload = op.fn(graph, **arguments)
    except GraphSimError as exc:
        return graph, name, arguments, exc.to_result()
    return work, name, arguments, {"status": "ok", **plain(payload)}
