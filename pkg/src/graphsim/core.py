"""Directed property-graph model, predicates, canonical form and state hashing.

Numbers are held as :class:`decimal.Decimal` so that weight arithmetic such as
``100 * 1.12`` is exact and hashes are bit-stable across platforms.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterable, Mapping, Union

from graphsim.errors import Conflict, InvalidArgument, NotFound, ValidationError

Value = Union[str, Decimal, bool]
EdgeKey = tuple[str, str, str]

LABEL_FIELD = "@label"
PREDICATE_OPS = ("eq", "ne", "gt", "ge", "lt", "le", "in", "exists")
_ORDER_OPS = ("gt", "ge", "lt", "le")


# ---------------------------------------------------------------------------
# values and canonical form
# ---------------------------------------------------------------------------


def to_value(raw: Any) -> Value:
    """Coerce a wire value into a property value, rejecting non-finite numbers."""
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, str):
        try:
            raw.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise InvalidArgument(f"text value is not valid unicode: {exc}") from None
        return raw
    if isinstance(raw, int):
        return Decimal(raw)
    if isinstance(raw, float):
        if not math.isfinite(raw):
            raise InvalidArgument(f"number must be finite, got {raw!r}")
        return Decimal(repr(raw))
    if isinstance(raw, Decimal):
        if not raw.is_finite():
            raise InvalidArgument(f"number must be finite, got {raw!r}")
        return raw
    raise InvalidArgument(f"unsupported property value {raw!r} ({type(raw).__name__})")


def is_number(value: Any) -> bool:
    return isinstance(value, (int, float, Decimal)) and not isinstance(value, bool)


def to_weight(raw: Any) -> Decimal:
    if not is_number(raw):
        raise InvalidArgument(f"weight must be a number, got {raw!r}")
    weight = to_value(raw)
    assert isinstance(weight, Decimal)
    if weight < 0:
        raise InvalidArgument(f"weight must be non-negative, got {format_decimal(weight)}")
    return weight


def format_decimal(d: Decimal) -> str:
    """Normalized positional rendering: no exponent, no trailing zeros, no -0."""
    d = d.normalize()
    if d == 0:
        return "0"
    return format(d, "f")


def plain(obj: Any) -> Any:
    """Convert a structure to JSON-ready builtins (Decimal -> int/float, tuple -> list)."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Decimal):
        if obj == obj.to_integral_value():
            return int(obj)
        return float(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise InvalidArgument(f"number must be finite, got {obj!r}")
        return int(obj) if obj.is_integer() else obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Mapping):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [plain(v) for v in obj]
        if isinstance(obj, (set, frozenset)):
            items.sort(key=canonical_json)
        return items
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Byte-stable JSON: sorted keys, compact separators, normalized numbers."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (int, float, Decimal)):
        return format_decimal(to_value(obj))  # type: ignore[arg-type]
    if isinstance(obj, Mapping):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k, ensure_ascii=False)}:{canonical_json(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, (set, frozenset)):
        return "[" + ",".join(sorted(canonical_json(v) for v in obj)) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def values_equal(a: Any, b: Any) -> bool:
    """Type-aware equality: numbers compare numerically, booleans never equal numbers."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if is_number(a) and is_number(b):
        return to_value(a) == to_value(b)
    if is_number(a) or is_number(b):
        return False
    return canonical_json(a) == canonical_json(b)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass
class NodeRecord:
    name: str
    label: str = ""
    properties: dict[str, Value] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "label": self.label, "properties": dict(self.properties)}

    def copy(self) -> NodeRecord:
        return NodeRecord(self.name, self.label, dict(self.properties))


@dataclass
class EdgeRecord:
    source: str
    target: str
    rel_type: str
    weight: Decimal | None = None
    properties: dict[str, Value] = field(default_factory=dict)

    @property
    def key(self) -> EdgeKey:
        return (self.source, self.target, self.rel_type)

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"source": self.source, "target": self.target, "rel_type": self.rel_type}
        if self.weight is not None:
            doc["weight"] = self.weight
        doc["properties"] = dict(self.properties)
        return doc

    def copy(self) -> EdgeRecord:
        return EdgeRecord(self.source, self.target, self.rel_type, self.weight, dict(self.properties))


def key_dict(key: EdgeKey) -> dict[str, str]:
    return {"source": key[0], "target": key[1], "rel_type": key[2]}


def _properties(raw: Any, where: str, violations: list[str]) -> dict[str, Value]:
    if raw is None:
        return {}
    if not isinstance(raw, Mapping):
        violations.append(f"{where}: properties must be an object")
        return {}
    props: dict[str, Value] = {}
    for name, value in raw.items():
        try:
            props[str(name)] = to_value(value)
        except InvalidArgument as exc:
            violations.append(f"{where}: property {name!r}: {exc.message}")
    return props


def node_from_dict(doc: Any) -> NodeRecord:
    violations: list[str] = []
    node = _node_from_dict(doc, "node", violations)
    if violations or node is None:
        raise InvalidArgument("; ".join(violations) or "invalid node")
    return node


def _node_from_dict(doc: Any, where: str, violations: list[str]) -> NodeRecord | None:
    if not isinstance(doc, Mapping):
        violations.append(f"{where}: must be an object")
        return None
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        violations.append(f"{where}: name must be a non-empty string")
        return None
    label = doc.get("label", "") or ""
    if not isinstance(label, str):
        violations.append(f"{where} {name!r}: label must be a string")
        label = ""
    return NodeRecord(name, label, _properties(doc.get("properties"), f"{where} {name!r}", violations))


def edge_from_dict(doc: Any) -> EdgeRecord:
    violations: list[str] = []
    edge = _edge_from_dict(doc, "edge", violations)
    if violations or edge is None:
        raise InvalidArgument("; ".join(violations) or "invalid edge")
    return edge


def _edge_from_dict(doc: Any, where: str, violations: list[str]) -> EdgeRecord | None:
    if not isinstance(doc, Mapping):
        violations.append(f"{where}: must be an object")
        return None
    fields = {}
    for name in ("source", "target", "rel_type"):
        value = doc.get(name)
        if not isinstance(value, str) or (name != "rel_type" and not value):
            violations.append(f"{where}: {name} must be a{' non-empty' if name != 'rel_type' else ''} string")
            return None
        fields[name] = value
    weight = None
    if doc.get("weight") is not None:
        try:
            weight = to_weight(doc["weight"])
        except InvalidArgument as exc:
            violations.append(f"{where} {fields['source']}->{fields['target']}: {exc.message}")
    props = _properties(doc.get("properties"), f"{where} {fields['source']}->{fields['target']}", violations)
    return EdgeRecord(fields["source"], fields["target"], fields["rel_type"], weight, props)


# ---------------------------------------------------------------------------
# graph
# ---------------------------------------------------------------------------


class PropertyGraph:
    """Directed labeled property graph with at most one edge per (source, target, rel_type)."""

    def __init__(self) -> None:
        self.nodes: dict[str, NodeRecord] = {}
        self.edges: dict[EdgeKey, EdgeRecord] = {}
        self._out: dict[str, set[EdgeKey]] = {}
        self._in: dict[str, set[EdgeKey]] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"PropertyGraph(nodes={len(self.nodes)}, edges={len(self.edges)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return canonical_json(self.to_dict()) == canonical_json(other.to_dict())

    # -- mutation ----------------------------------------------------------

    def add_node(self, node: NodeRecord) -> None:
        if node.name in self.nodes:
            raise Conflict(f"node already exists: {node.name}", names=[node.name])
        self.nodes[node.name] = node
        self._out[node.name] = set()
        self._in[node.name] = set()

    def add_edge(self, edge: EdgeRecord) -> None:
        missing = [n for n in (edge.source, edge.target) if n not in self.nodes]
        if missing:
            raise NotFound(f"edge endpoint not found: {', '.join(sorted(set(missing)))}", names=sorted(set(missing)))
        if edge.key in self.edges:
            raise Conflict(f"edge already exists: {_fmt_key(edge.key)}", edges=[key_dict(edge.key)])
        if edge.weight is not None and edge.weight < 0:
            raise InvalidArgument(f"weight must be non-negative on {_fmt_key(edge.key)}")
        self.edges[edge.key] = edge
        self._out[edge.source].add(edge.key)
        self._in[edge.target].add(edge.key)

    def remove_edge(self, key: EdgeKey) -> EdgeRecord:
        edge = self.edges.pop(key)
        self._out[key[0]].discard(key)
        self._in[key[1]].discard(key)
        return edge

    def remove_node(self, name: str) -> list[EdgeKey]:
        """Remove a node and every incident edge; returns the removed edge keys."""
        incident = sorted(self._out[name] | self._in[name])
        for key in incident:
            self.remove_edge(key)
        del self.nodes[name]
        del self._out[name]
        del self._in[name]
        return incident

    # -- queries -----------------------------------------------------------

    def out_edges(self, name: str) -> list[EdgeRecord]:
        return [self.edges[k] for k in sorted(self._out[name])]

    def in_edges(self, name: str) -> list[EdgeRecord]:
        return [self.edges[k] for k in sorted(self._in[name])]

    def edges_between(self, source: str, target: str) -> list[EdgeRecord]:
        return [self.edges[k] for k in sorted(self._out.get(source, ())) if k[1] == target]

    def successors(self, name: str) -> list[str]:
        return sorted({k[1] for k in self._out[name]})

    def predecessors(self, name: str) -> list[str]:
        return sorted({k[0] for k in self._in[name]})

    def undirected_neighbors(self, name: str) -> set[str]:
        """Distinct neighbors ignoring direction, self excluded."""
        found = {k[1] for k in self._out[name]} | {k[0] for k in self._in[name]}
        found.discard(name)
        return found

    def in_degree(self, name: str) -> int:
        return len(self._in[name])

    def out_degree(self, name: str) -> int:
        return len(self._out[name])

    def degree(self, name: str) -> int:
        return len(self._in[name]) + len(self._out[name])

    def max_degree(self) -> int:
        return max((self.degree(n) for n in self.nodes), default=0)

    def sorted_edges(self) -> list[EdgeRecord]:
        return [self.edges[k] for k in sorted(self.edges)]

    def integrity_violations(self) -> list[str]:
        """Full-scan check of referential integrity and index consistency."""
        problems = []
        for key, edge in self.edges.items():
            if key != edge.key:
                problems.append(f"edge stored under wrong key {key}")
            for end in (edge.source, edge.target):
                if end not in self.nodes:
                    problems.append(f"edge {_fmt_key(key)} references missing node {end}")
            if edge.weight is not None and edge.weight < 0:
                problems.append(f"edge {_fmt_key(key)} has negative weight")
        for name, node in self.nodes.items():
            if name != node.name or not name:
                problems.append(f"node stored under wrong name {name!r}")
        out_index = {k for keys in self._out.values() for k in keys}
        in_index = {k for keys in self._in.values() for k in keys}
        if out_index != set(self.edges) or in_index != set(self.edges):
            problems.append("adjacency index out of sync with edge set")
        if set(self._out) != set(self.nodes) or set(self._in) != set(self.nodes):
            problems.append("adjacency index out of sync with node set")
        return problems

    # -- copying and serialization -----------------------------------------

    def copy(self) -> PropertyGraph:
        g = PropertyGraph()
        g.nodes = {name: node.copy() for name, node in self.nodes.items()}
        g.edges = {key: edge.copy() for key, edge in self.edges.items()}
        g._out = {name: set(keys) for name, keys in self._out.items()}
        g._in = {name: set(keys) for name, keys in self._in.items()}
        return g

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": [self.nodes[n].to_dict() for n in sorted(self.nodes)],
            "edges": [e.to_dict() for e in self.sorted_edges()],
        }

    @classmethod
    def from_dict(cls, doc: Any) -> PropertyGraph:
        """Build a graph from a snapshot document, collecting every violation."""
        violations: list[str] = []
        g = cls()
        if not isinstance(doc, Mapping):
            raise ValidationError(["snapshot must be an object with 'nodes' and 'edges'"])
        raw_nodes = doc.get("nodes", [])
        raw_edges = doc.get("edges", [])
        if not isinstance(raw_nodes, list):
            violations.append("'nodes' must be a list")
            raw_nodes = []
        if not isinstance(raw_edges, list):
            violations.append("'edges' must be a list")
            raw_edges = []
        for i, raw in enumerate(raw_nodes):
            node = _node_from_dict(raw, f"nodes[{i}]", violations)
            if node is None:
                continue
            if node.name in g.nodes:
                violations.append(f"nodes[{i}]: duplicate node name {node.name!r}")
                continue
            g.add_node(node)
        for i, raw in enumerate(raw_edges):
            edge = _edge_from_dict(raw, f"edges[{i}]", violations)
            if edge is None:
                continue
            missing = [n for n in (edge.source, edge.target) if n not in g.nodes]
            if missing:
                violations.append(f"edges[{i}]: endpoint(s) not found: {', '.join(missing)}")
                continue
            if edge.key in g.edges:
                violations.append(f"edges[{i}]: duplicate edge {_fmt_key(edge.key)}")
                continue
            g.add_edge(edge)
        if violations:
            raise ValidationError(violations)
        return g

    @classmethod
    def build(
        cls,
        nodes: Iterable[str | NodeRecord],
        edges: Iterable[tuple | EdgeRecord] = (),
    ) -> PropertyGraph:
        """Convenience constructor: nodes as names, edges as (s, t[, rel_type[, weight]]) tuples."""
        g = cls()
        for n in nodes:
            g.add_node(n if isinstance(n, NodeRecord) else NodeRecord(n))
        for e in edges:
            if isinstance(e, EdgeRecord):
                g.add_edge(e)
                continue
            source, target, *rest = e
            rel_type = rest[0] if rest else "LINK"
            weight = to_weight(rest[1]) if len(rest) > 1 and rest[1] is not None else None
            g.add_edge(EdgeRecord(source, target, rel_type, weight))
        return g


def _fmt_key(key: EdgeKey) -> str:
    return f"{key[0]}-[{key[2]}]->{key[1]}"


def load_snapshot(path: str | Path) -> PropertyGraph:
    doc = json.loads(Path(path).read_text(encoding="utf-8"), parse_float=Decimal)
    return PropertyGraph.from_dict(doc)


def dump_snapshot(graph: PropertyGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plain(graph.to_dict()), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Predicate:
    field: str
    op: str
    value: Any

    @classmethod
    def parse(cls, field_name: str, spec: Any) -> Predicate:
        """Parse ``{"op": ..., "value": ...}``; a bare scalar means equality."""
        if not isinstance(spec, Mapping):
            return cls(field_name, "eq", to_value(spec))
        op = spec.get("op")
        if op not in PREDICATE_OPS:
            raise InvalidArgument(f"predicate on {field_name!r}: unknown op {op!r}")
        if "value" not in spec:
            raise InvalidArgument(f"predicate on {field_name!r}: missing value")
        value = spec["value"]
        if op == "exists":
            if not isinstance(value, bool):
                raise InvalidArgument(f"predicate on {field_name!r}: exists requires a boolean value")
        elif op == "in":
            if not isinstance(value, (list, tuple)) or not value:
                raise InvalidArgument(f"predicate on {field_name!r}: in requires a non-empty list")
            value = tuple(to_value(v) for v in value)
        elif op in _ORDER_OPS:
            if not is_number(value):
                raise InvalidArgument(f"predicate on {field_name!r}: {op} requires a numeric value")
            value = to_value(value)
        else:
            value = to_value(value)
        return cls(field_name, op, value)

    def to_dict(self) -> dict[str, Any]:
        return {"op": self.op, "value": list(self.value) if isinstance(self.value, tuple) else self.value}


def parse_predicates(spec: Mapping[str, Any] | None) -> list[Predicate]:
    if not spec:
        return []
    if not isinstance(spec, Mapping):
        raise InvalidArgument("properties must be an object of predicates")
    return [Predicate.parse(name, s) for name, s in sorted(spec.items())]


_MISSING = object()


def check_value(actual: Any, p: Predicate, subject: str = "", diagnostics: list[str] | None = None) -> bool:
    """Evaluate a predicate against a raw value; ``_MISSING`` marks absence."""
    if p.op == "exists":
        return (actual is not _MISSING) == p.value
    if actual is _MISSING or actual is None:
        return False
    if p.op == "eq":
        return values_equal(actual, p.value)
    if p.op == "ne":
        return not values_equal(actual, p.value)
    if p.op == "in":
        return any(values_equal(actual, v) for v in p.value)
    if not is_number(actual):
        if diagnostics is not None:
            diagnostics.append(f"{subject}: {p.op} on non-numeric value of {p.field!r}")
        return False
    a = to_value(actual)
    if p.op == "gt":
        return a > p.value
    if p.op == "ge":
        return a >= p.value
    if p.op == "lt":
        return a < p.value
    return a <= p.value


def eval_predicate(node: NodeRecord, p: Predicate, diagnostics: list[str] | None = None) -> bool:
    """Truth of ``p`` on ``node``; absent properties are false except for ``exists false``."""
    if p.field == LABEL_FIELD:
        actual: Any = node.label
    else:
        actual = node.properties.get(p.field, _MISSING)
    return check_value(actual, p, node.name, diagnostics)


def induced_subgraph(g: PropertyGraph, keep: Iterable[str]) -> PropertyGraph:
    """The subgraph on ``keep`` with every edge of ``g`` whose endpoints are both kept."""
    keep = set(keep)
    unknown = sorted(keep - set(g.nodes))
    if unknown:
        raise InvalidArgument(f"unknown node(s) in keep set: {', '.join(unknown)}", names=unknown)
    sub = PropertyGraph()
    for name in sorted(keep):
        sub.add_node(g.nodes[name].copy())
    for edge in g.sorted_edges():
        if edge.source in keep and edge.target in keep:
            sub.add_edge(edge.copy())
    return sub


# ---------------------------------------------------------------------------
# hashing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateHash:
    digest: bytes

    def hex(self) -> str:
        return self.digest.hex()

    def __str__(self) -> str:
        return self.hex()


def state_hash(g: PropertyGraph) -> StateHash:
    return StateHash(hashlib.sha256(canonical_json(g.to_dict()).encode("utf-8")).digest())
