"""Path, connectivity and combinatorial algorithms, greedy coloring and graph fusion.

All traversals visit neighbors in name order so that results are reproducible
call for call, which replay verification depends on.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Iterable, Sequence

from graphsim.core import EdgeKey, EdgeRecord, NodeRecord, PropertyGraph, key_dict
from graphsim.errors import InvalidArgument, NotFound

NO_PATH = "no valid path exists"
EMPTY_GRAPH = "empty_graph"


def _fmt(key: EdgeKey) -> str:
    return f"{key[0]}->{key[1]} ({key[2]})"


def _require(graph: PropertyGraph, *names: str) -> None:
    missing = sorted({n for n in names if n not in graph.nodes})
    if missing:
        raise NotFound(f"node(s) not found: {', '.join(missing)}", names=missing)


# ---------------------------------------------------------------------------
# paths and connectivity
# ---------------------------------------------------------------------------


def _resolve_weighted(graph: PropertyGraph, weighted: bool | str) -> bool:
    if weighted == "auto":
        return bool(graph.edges) and all(e.weight is not None for e in graph.edges.values())
    if weighted is True:
        unweighted = [e.key for e in graph.sorted_edges() if e.weight is None]
        if unweighted:
            raise InvalidArgument(f"weighted path requested but edge {_fmt(unweighted[0])} has no weight",
                                  edges=[key_dict(unweighted[0])])
        return True
    if weighted is False:
        return False
    raise InvalidArgument(f"weighted must be true, false or 'auto', got {weighted!r}")


def _hop_distances_to(graph: PropertyGraph, target: str) -> dict[str, int]:
    dist = {target: 0}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        for u in graph.predecessors(v):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def _weighted_distances_to(graph: PropertyGraph, target: str) -> dict[str, tuple[Decimal, int]]:
    # key is (weight sum, hop count): among equal-cost paths prefer fewer hops,
    # which also keeps the greedy walk below cycle-free over zero-weight edges
    dist: dict[str, tuple[Decimal, int]] = {target: (Decimal(0), 0)}
    heap = [(Decimal(0), 0, target)]
    done: set[str] = set()
    while heap:
        w, h, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for edge in graph.in_edges(v):
            u = edge.source
            if u == v:
                continue
            cand = (w + edge.weight, h + 1)
            if u not in dist or cand < dist[u]:
                dist[u] = cand
                heapq.heappush(heap, (cand[0], cand[1], u))
    return dist


def shortest_path(graph: PropertyGraph, source: str, target: str, weighted: bool | str = "auto") -> dict:
    """Directed shortest path, breaking ties toward the lexicographically smallest name sequence.

    Unknown endpoints produce a structured not-found result rather than an error.
    """
    use_weights = _resolve_weighted(graph, weighted)
    missing = sorted({n for n in (source, target) if n not in graph.nodes})
    if missing:
        return {"found": False, "path": [], "cost": None, "weighted": use_weights,
                "annotation": NO_PATH, "missing": missing}
    if source == target:
        return {"found": True, "path": [source], "cost": 0, "weighted": use_weights}

    path = [source]
    if use_weights:
        wdist = _weighted_distances_to(graph, target)
        if source not in wdist:
            return {"found": False, "path": [], "cost": None, "weighted": True, "annotation": NO_PATH}
        u = source
        while u != target:
            here = wdist[u]
            u = min(
                e.target
                for e in graph.out_edges(u)
                if e.target in wdist and e.target != u and (here[0] - e.weight, here[1] - 1) == wdist[e.target]
            )
            path.append(u)
        return {"found": True, "path": path, "cost": wdist[source][0], "weighted": True}

    hdist = _hop_distances_to(graph, target)
    if source not in hdist:
        return {"found": False, "path": [], "cost": None, "weighted": False, "annotation": NO_PATH}
    u = source
    while u != target:
        u = min(v for v in graph.successors(u) if hdist.get(v) == hdist[u] - 1)
        path.append(u)
    return {"found": True, "path": path, "cost": hdist[source], "weighted": False}


def reachable_from(graph: PropertyGraph, source: str) -> set[str]:
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in graph.successors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def weak_components(graph: PropertyGraph) -> list[list[str]]:
    seen: set[str] = set()
    comps = []
    for start in sorted(graph.nodes):
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in graph.undirected_neighbors(u):
                if v not in comp:
                    comp.add(v)
                    queue.append(v)
        seen |= comp
        comps.append(sorted(comp))
    return comps


def check_graph_connectivity(graph: PropertyGraph, source: str | None = None, target: str | None = None) -> dict:
    """Directed reachability for a pair, weak connectivity for the whole graph."""
    if (source is None) != (target is None):
        raise InvalidArgument("give both source and target for a pairwise check, or neither for a global one")
    if source is not None:
        missing = sorted({n for n in (source, target) if n not in graph.nodes})
        if missing:
            return {"connected": False, "mode": "pairwise", "annotation": NO_PATH, "missing": missing}
        connected = target in reachable_from(graph, source)
        result: dict[str, Any] = {"connected": connected, "mode": "pairwise"}
        if not connected:
            result["annotation"] = NO_PATH
        return result
    if not graph.nodes:
        return {"connected": False, "mode": "global", "annotation": EMPTY_GRAPH, "components": 0}
    comps = weak_components(graph)
    return {"connected": len(comps) == 1, "mode": "global", "components": len(comps)}


def check_direct_edge(graph: PropertyGraph, source: str, target: str, rel_type: str | None = None) -> dict:
    _require(graph, source, target)
    if rel_type is None:
        exists = bool(graph.edges_between(source, target))
    else:
        exists = (source, target, rel_type) in graph.edges
    return {"exists": exists}


def analyze_graph_node(graph: PropertyGraph, name: str) -> dict:
    _require(graph, name)
    node = graph.nodes[name]
    return {
        "name": name,
        "label": node.label,
        "in_degree": graph.in_degree(name),
        "out_degree": graph.out_degree(name),
        "degree": graph.degree(name),
        "neighbor_count": len(graph.undirected_neighbors(name)),
        "property_count": len(node.properties),
    }


# ---------------------------------------------------------------------------
# maximum flow (Edmonds-Karp)
# ---------------------------------------------------------------------------


def calculate_max_flow(graph: PropertyGraph, source: str, sink: str) -> dict:
    """Maximum s-t flow with edge weights as capacities (shortest augmenting paths)."""
    _require(graph, source, sink)
    if source == sink:
        raise InvalidArgument("source and sink must differ")
    reach = reachable_from(graph, source)
    arcs: list[EdgeRecord] = []
    for edge in graph.sorted_edges():
        if edge.source not in reach or edge.source == edge.target:
            continue
        if edge.weight is None:
            raise InvalidArgument(f"edge {_fmt(edge.key)} has no weight (capacity)", edges=[key_dict(edge.key)])
        arcs.append(edge)

    cap = [a.weight for a in arcs]
    flow = [Decimal(0)] * len(arcs)
    # residual adjacency: (neighbor, arc index, +1 forward / -1 backward)
    adj: dict[str, list[tuple[str, int, int]]] = {}
    for i, a in enumerate(arcs):
        adj.setdefault(a.source, []).append((a.target, i, 1))
        adj.setdefault(a.target, []).append((a.source, i, -1))
    for entries in adj.values():
        entries.sort(key=lambda t: (t[0], t[1], t[2]))

    total = Decimal(0)
    while True:
        parent: dict[str, tuple[str, int, int]] = {}
        queue = deque([source])
        seen = {source}
        while queue and sink not in seen:
            u = queue.popleft()
            for v, i, d in adj.get(u, ()):
                residual = cap[i] - flow[i] if d == 1 else flow[i]
                if v not in seen and residual > 0:
                    seen.add(v)
                    parent[v] = (u, i, d)
                    queue.append(v)
        if sink not in seen:
            break
        bottleneck = None
        v = sink
        while v != source:
            u, i, d = parent[v]
            residual = cap[i] - flow[i] if d == 1 else flow[i]
            bottleneck = residual if bottleneck is None else min(bottleneck, residual)
            v = u
        v = sink
        while v != source:
            u, i, d = parent[v]
            flow[i] += bottleneck if d == 1 else -bottleneck
            v = u
        total += bottleneck

    flows = [dict(key_dict(a.key), flow=f) for a, f in zip(arcs, flow) if f > 0]
    return {"max_flow_value": total, "flows": flows}


# ---------------------------------------------------------------------------
# bipartite matching (augmenting paths)
# ---------------------------------------------------------------------------


def calculate_max_matching(graph: PropertyGraph, left_label: str, right_label: str) -> dict:
    """Maximum-cardinality matching between two label classes; edge direction is ignored."""
    if left_label == right_label:
        raise InvalidArgument("left_label and right_label must differ")
    offenders = set()
    adj: dict[str, set[str]] = {}
    for edge in graph.sorted_edges():
        if edge.source == edge.target:
            continue
        ends = (edge.source, edge.target)
        labels = [graph.nodes[n].label for n in ends]
        for n, lab in zip(ends, labels):
            if lab not in (left_label, right_label):
                offenders.add(n)
        if labels[0] == labels[1] or offenders.intersection(ends):
            continue
        left, right = ends if labels[0] == left_label else ends[::-1]
        adj.setdefault(left, set()).add(right)
    if offenders:
        names = sorted(offenders)
        raise InvalidArgument(
            f"edge endpoint(s) carry neither {left_label!r} nor {right_label!r}: {', '.join(names)}", names=names
        )

    match_right: dict[str, str] = {}

    def augment(u: str, visited: set[str]) -> bool:
        for v in sorted(adj.get(u, ())):
            if v in visited:
                continue
            visited.add(v)
            if v not in match_right or augment(match_right[v], visited):
                match_right[v] = u
                return True
        return False

    for u in sorted(adj):
        augment(u, set())
    pairs = sorted((u, v) for v, u in match_right.items())
    return {"size": len(pairs), "pairs": [list(p) for p in pairs]}


# ---------------------------------------------------------------------------
# greedy coloring
# ---------------------------------------------------------------------------


@dataclass
class ColoringResult:
    budget: int
    max_degree: int
    assignment: dict[str, int]
    colors_used: int
    color_sum: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "budget": self.budget,
            "max_degree": self.max_degree,
            "assignment": dict(sorted(self.assignment.items())),
            "colors_used": self.colors_used,
            "color_sum": self.color_sum,
        }


def greedy_coloring(graph: PropertyGraph, order: Sequence[str] | None = None) -> ColoringResult:
    """Lowest-available-color assignment in ascending name order (or ``order``).

    Adjacency ignores direction and self-loops. The budget is max degree + 1,
    with degree counted as in + out edges, which bounds any greedy outcome.
    """
    order = sorted(graph.nodes) if order is None else list(order)
    assignment: dict[str, int] = {}
    for name in order:
        taken = {assignment[v] for v in graph.undirected_neighbors(name) if v in assignment}
        color = 0
        while color in taken:
            color += 1
        assignment[name] = color
    delta = graph.max_degree()
    return ColoringResult(
        budget=delta + 1,
        max_degree=delta,
        assignment=assignment,
        colors_used=len(set(assignment.values())),
        color_sum=sum(assignment.values()),
    )


# ---------------------------------------------------------------------------
# event-driven fusion
# ---------------------------------------------------------------------------


@dataclass
class FusedGraph:
    graph: PropertyGraph
    targets: frozenset[str]
    pruned_attribute_count: int


def within_hops(graph: PropertyGraph, sources: Iterable[str], hops: int) -> set[str]:
    frontier = set(sources)
    seen = set(frontier)
    for _ in range(hops):
        frontier = {v for u in frontier for v in graph.undirected_neighbors(u)} - seen
        seen |= frontier
    return seen


def fuse_graphs(graphs: Sequence[PropertyGraph], targets: Iterable[str], hops: int = 2) -> FusedGraph:
    """Merge graphs by node name and edge key, then strip properties far from the targets.

    Later graphs win property conflicts. Structure (all nodes, labels, edges) is kept.
    """
    targets = frozenset(targets)
    if not targets:
        raise InvalidArgument("fusion needs at least one target node")
    merged = PropertyGraph()
    for g in graphs:
        for name in sorted(g.nodes):
            node = g.nodes[name]
            if name in merged.nodes:
                existing = merged.nodes[name]
                existing.properties.update(node.properties)
                if node.label:
                    existing.label = node.label
            else:
                merged.add_node(node.copy())
        for edge in g.sorted_edges():
            if edge.key in merged.edges:
                existing_edge = merged.edges[edge.key]
                existing_edge.properties.update(edge.properties)
                if edge.weight is not None:
                    existing_edge.weight = edge.weight
            else:
                merged.add_edge(edge.copy())
    missing = sorted(targets - set(merged.nodes))
    if missing:
        raise InvalidArgument(f"fusion target(s) not in any graph: {', '.join(missing)}", names=missing)
    keep = within_hops(merged, targets, hops)
    pruned = 0
    for name, node in merged.nodes.items():
        if name not in keep and node.properties:
            pruned += len(node.properties)
            merged.nodes[name] = NodeRecord(name, node.label, {})
    return FusedGraph(merged, targets, pruned)
