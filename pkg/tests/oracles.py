"""Independent reference checks used by the test suite.

The liminal and postliminal oracles evaluate the path-space conditions
directly: they enumerate paths and count shift-equivalent ones, without
looking at cycles, entries or any classification rule.
"""
from __future__ import annotations

import random

import networkx as nx

from ckgraph.digraph import DirectedGraph
from ckgraph.paths import UP, FinitePath, brute_lags, enumerate_up


def random_graph(rng: random.Random, max_vertices: int = 6, max_edges: int = 10) -> DirectedGraph:
    n = rng.randint(1, max_vertices)
    m = rng.randint(0, max_edges)
    vs = [f"v{i}" for i in range(n)]
    edges = [(f"e{j}", rng.choice(vs), rng.choice(vs)) for j in range(m)]
    return DirectedGraph(vs, edges)


def _reach_sets(g: DirectedGraph) -> dict[str, set[str]]:
    # w in out[v] when a path with range v has source w
    d = nx.DiGraph()
    d.add_nodes_from(g.vertices)
    for e in g.edges:
        d.add_edge(e.r, e.s)
    return {v: nx.descendants(d, v) | {v} for v in g.vertices}


def _equivalent(x, y) -> bool:
    if isinstance(x, FinitePath) or isinstance(y, FinitePath):
        return isinstance(x, FinitePath) and isinstance(y, FinitePath) and x.s() == y.s()
    span = len(x.head) + len(y.head) + len(x.cycle) + len(y.cycle)
    depth = 4 * span + 4
    return bool(brute_lags(x, y, depth, span))


def _class_members(g: DirectedGraph, v: str, x, depth: int, reach, stop=lambda y: False):
    """Distinct paths with range ``v`` equivalent to ``x`` and described within ``depth`` edges.

    Returns ``(members, True)`` as soon as a member satisfies ``stop``.
    """
    if isinstance(x, FinitePath):
        targets = {x.s()}
    else:
        targets = {g.r(e) for e in x.cycle}
    found = set()
    stack = [((), v)]
    while stack:
        head, w = stack.pop()
        if isinstance(x, FinitePath):
            if w in targets and not g.edges_into(w):
                y = FinitePath(head, at=v, graph=g)
                found.add(y)
                if stop(y):
                    return found, True
        elif w in targets:
            for i, e in enumerate(x.cycle):
                if g.r(e) == w:
                    y = UP(head, x.cycle[i:] + x.cycle[:i], graph=g)
                    if y not in found and _equivalent(x, y):
                        found.add(y)
                        if stop(y):
                            return found, True
        if len(head) < depth:
            for e in g.edges_into(w):
                if reach[g.s(e)] & targets:
                    stack.append((head + (e,), g.s(e)))
    return found, False


def _size(y) -> int:
    return len(y.edges) if isinstance(y, FinitePath) else len(y.head)


def _finite_to_sources(g: DirectedGraph, v: str, depth: int) -> list[FinitePath]:
    out = []
    stack = [((), v)]
    while stack:
        head, w = stack.pop()
        if not g.edges_into(w):
            out.append(FinitePath(head, at=v, graph=g))
        if len(head) < depth:
            for e in g.edges_into(w):
                stack.append((head + (e,), g.s(e)))
    return out


def literal_liminal(g: DirectedGraph) -> bool:
    """Every x in E^{<=inf} has finitely many equivalent paths with range r(x).

    Finiteness is read off the enumeration: a member whose normal form is
    longer than |V| edges exists exactly when the count keeps growing.
    """
    n = len(g.vertices)
    reach = _reach_sets(g)
    for v in sorted(g.vertices):
        xs = list(enumerate_up(g, v, n)) + _finite_to_sources(g, v, n)
        for x in xs:
            # a member longer than |V| edges can be pumped, so the class is infinite
            _, infinite = _class_members(g, v, x, 2 * n + 1, reach, stop=lambda y: _size(y) > n)
            if infinite:
                return False
    return True


def _shifted(x: UP, k: int, g) -> UP:
    L = len(x.head)
    head = tuple(x.edge_at(i) for i in range(k + 1, k + L + 1))
    cyc = tuple(x.edge_at(i) for i in range(k + L + 1, k + L + len(x.cycle) + 1))
    return UP(head, cyc, graph=g)


def literal_postliminal(g: DirectedGraph) -> bool:
    """Every infinite x has an n with sigma^n(x) the only equivalent path in x(n)E^inf."""
    n = len(g.vertices)
    reach = _reach_sets(g)
    for v in sorted(g.vertices):
        for x in enumerate_up(g, v, n):
            ok = False
            for k in range(len(x.head) + len(x.cycle)):
                sx = _shifted(x, k, g)
                _, other = _class_members(g, sx.r(g), x, 2 * n + 1, reach, stop=lambda y: y != sx)
                if not other:
                    ok = True
                    break
            if not ok:
                return False
    return True


# -- product pairs ----------------------------------------------------------------


def small_graph(rng: random.Random, prefix: str) -> DirectedGraph:
    n = rng.randint(1, 3)
    vs = [f"{prefix}{i}" for i in range(n)]
    edges = [(f"{prefix}e{j}", rng.choice(vs), rng.choice(vs)) for j in range(rng.randint(1, 4))]
    return DirectedGraph(vs, edges)


def boundary_paths_1graph(g: DirectedGraph) -> list:
    """UP paths with short heads plus finite paths of length <= 2 ending at sources."""
    out: list = []
    for v in sorted(g.vertices):
        out += enumerate_up(g, v, 1)
        out += [p for p in _finite_to_sources(g, v, 2)]
    return out


def product_pairs(rng: random.Random, count: int):
    """Yield ``(E, F, lam, (x1, x2), (y1, y2))`` with coordinates drawn from E and F."""
    from ckgraph.kgraph import product_kgraph

    made = 0
    while made < count:
        e, f = small_graph(rng, "a"), small_graph(rng, "b")
        p1, p2 = boundary_paths_1graph(e), boundary_paths_1graph(f)
        if not p1 or not p2:
            continue
        lam = product_kgraph(e, f)
        yield e, f, lam, (rng.choice(p1), rng.choice(p2)), (rng.choice(p1), rng.choice(p2))
        made += 1
