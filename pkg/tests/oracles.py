"""Brute-force reference implementations, deliberately naive and independent of graphsim.algorithms."""

from __future__ import annotations

import itertools
import random
from decimal import Decimal

from graphsim.core import EdgeRecord, NodeRecord, PropertyGraph


def _arcs(g: PropertyGraph):
    # plain tuples so nothing here leans on the graph's adjacency indexes
    return [(e.source, e.target, e.weight) for e in g.edges.values()]


def min_cut(g: PropertyGraph, s: str, t: str) -> Decimal:
    """Minimum s-t cut by enumerating every source-side vertex set."""
    others = [n for n in g.nodes if n not in (s, t)]
    arcs = _arcs(g)
    best = None
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            side = {s, *extra}
            cut = sum((w for a, b, w in arcs if a in side and b not in side), Decimal(0))
            best = cut if best is None else min(best, cut)
    return best


def simple_paths(g: PropertyGraph, s: str, t: str):
    arcs = _arcs(g)
    out: dict[str, list[tuple[str, Decimal | None]]] = {}
    for a, b, w in arcs:
        out.setdefault(a, []).append((b, w))

    def walk(path, cost):
        u = path[-1]
        if u == t:
            yield list(path), cost
            return
        for v, w in out.get(u, ()):
            if v in path:
                continue
            path.append(v)
            yield from walk(path, cost + [w])
            path.pop()

    yield from walk([s], [])


def best_path(g: PropertyGraph, s: str, t: str, weighted: bool):
    """(cost, path) minimising cost, then hop count, then the name sequence."""
    if s == t:
        return 0, [s]
    best = None
    for path, ws in simple_paths(g, s, t):
        cost = sum(ws, Decimal(0)) if weighted else len(ws)
        # parallel edges give repeated paths with different costs; keep the cheapest
        key = (cost, len(path), path)
        if best is None or key < best:
            best = key
    return (best[0], best[2]) if best else (None, [])


def max_matching(g: PropertyGraph, left: str, right: str) -> int:
    pairs = set()
    for a, b, _ in _arcs(g):
        la, lb = g.nodes[a].label, g.nodes[b].label
        if a != b and {la, lb} == {left, right}:
            pairs.add(tuple(sorted((a, b))))
    pairs = sorted(pairs)
    best = 0

    def grow(i, used, size):
        nonlocal best
        best = max(best, size)
        if size + (len(pairs) - i) <= best:
            return
        for j in range(i, len(pairs)):
            a, b = pairs[j]
            if a not in used and b not in used:
                grow(j + 1, used | {a, b}, size + 1)

    grow(0, frozenset(), 0)
    return best


def random_graph(rng: random.Random, max_nodes: int = 8, weighted: bool = True, p: float = 0.35,
                 rel_types=("LINK", "ALT")) -> PropertyGraph:
    n = rng.randint(1, max_nodes)
    names = [chr(ord("a") + i) for i in range(n)]
    g = PropertyGraph()
    for name in names:
        g.add_node(NodeRecord(name, rng.choice(["L", "R"]), {"k": str(rng.randint(0, 2))}))
    for a in names:
        for b in names:
            for rel in rel_types:
                if rng.random() < p / len(rel_types):
                    w = Decimal(rng.randint(0, 9)) if weighted else None
                    g.add_edge(EdgeRecord(a, b, rel, w))
    return g


def random_bipartite(rng: random.Random, max_nodes: int = 10) -> PropertyGraph:
    n = rng.randint(2, max_nodes)
    g = PropertyGraph()
    names = [f"v{i}" for i in range(n)]
    for name in names:
        g.add_node(NodeRecord(name, rng.choice(["L", "R"])))
    for a in names:
        for b in names:
            if g.nodes[a].label != g.nodes[b].label and rng.random() < 0.3:
                g.add_edge(EdgeRecord(a, b, "E"))
    return g
