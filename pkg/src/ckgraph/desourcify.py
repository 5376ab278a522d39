"""Removing sources: heads for directed graphs, equivalence-class k-graphs in general.

A pair ``(x, m)`` with ``x`` a boundary path and ``m`` in ``N^k`` stands for
the vertex ``x(m ^ d(x))`` pushed ``m - m ^ d(x)`` steps past the end of
``x``; a triple ``(x, m, n)`` stands for the segment between two such
points.  Classes are compared through canonical keys.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .digraph import DirectedGraph, Edge, StagedFamily, sources
from .kgraph import (
    INF,
    KGraph,
    KInf,
    add,
    boundary_member,
    boundary_paths_finite,
    kdegree,
    kprefix,
    kshift,
    ksegment,
    leq,
    meet,
    sub,
    unit,
)
from .paths import FinitePath

Degree = tuple


# -- directed graphs ------------------------------------------------------------


def head_vertex(v: str, j: int) -> str:
    return f"{v}.head{j}"


def head_edge(v: str, j: int) -> str:
    return f"{v}.hd{j}"


def add_heads(E: DirectedGraph) -> StagedFamily:
    """``E`` with an infinite head ``v <- v.head1 <- v.head2 <- ...`` at every source ``v``.

    Stage ``N`` carries heads of length ``N``; its frontier is the last head
    vertex of each chain.
    """
    srcs = sorted(sources(E))

    def stage(n: int) -> DirectedGraph:
        verts = list(E.vertices)
        edges = list(E.edges)
        for v in srcs:
            for j in range(1, n + 1):
                verts.append(head_vertex(v, j))
                edges.append(Edge(head_edge(v, j), v if j == 1 else head_vertex(v, j - 1), head_vertex(v, j)))
        return DirectedGraph(verts, edges)

    def frontier(n: int) -> frozenset[str]:
        return frozenset(head_vertex(v, n) if n else v for v in srcs)

    return StagedFamily(stage, frontier, name="heads")


# -- classes --------------------------------------------------------------------


def _fmt(d: Degree) -> str:
    return ",".join(str(int(c)) for c in d)


def _seg_key(mu: FinitePath, lam: KGraph) -> tuple:
    return (mu.r(lam), mu.edges)


@dataclass(frozen=True)
class DesourcedVertexClass:
    """The class of ``(x, m)``; equal exactly when base vertex and excess agree."""

    x: object
    m: Degree
    lam: KGraph = field(compare=False, repr=False, hash=False)

    @property
    def key(self) -> tuple:
        d = kdegree(self.lam, self.x)
        cut = meet(self.m, d)
        return (kprefix(self.lam, self.x, cut).s(self.lam), sub(self.m, cut))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DesourcedVertexClass) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def name(self) -> str:
        base, exc = self.key
        return f"{base}~{_fmt(exc)}"


@dataclass(frozen=True)
class DesourcedMorphismClass:
    """The class of ``(x, (m, n))``: segment ``x(m ^ d, n ^ d)``, entry excess and degree."""

    x: object
    m: Degree
    n: Degree
    lam: KGraph = field(compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if not leq(self.m, self.n):
            raise ValueError(f"{self.m} is not below {self.n}")

    @property
    def key(self) -> tuple:
        d = kdegree(self.lam, self.x)
        a, b = meet(self.m, d), meet(self.n, d)
        return (_seg_key(ksegment(self.lam, self.x, a, b), self.lam), sub(self.m, a), sub(self.n, self.m))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DesourcedMorphismClass) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def degree(self) -> Degree:
        return sub(self.n, self.m)

    @property
    def range(self) -> DesourcedVertexClass:
        return DesourcedVertexClass(self.x, self.m, self.lam)

    @property
    def source(self) -> DesourcedVertexClass:
        return DesourcedVertexClass(self.x, self.n, self.lam)

    @property
    def name(self) -> str:
        (r, es), exc, deg = self.key
        seg = " ".join(es) if es else f"@{r}"
        return f"{seg}~{_fmt(exc)}~{_fmt(deg)}"


def v_equiv(lam: KGraph, a: tuple, b: tuple) -> bool:
    """``(x, m) ≈ (y, p)``: same base vertex and same excess."""
    (x, m), (y, p) = a, b
    dx, dy = kdegree(lam, x), kdegree(lam, y)
    cx, cy = meet(m, dx), meet(p, dy)
    return kprefix(lam, x, cx).s(lam) == kprefix(lam, y, cy).s(lam) and sub(m, cx) == sub(p, cy)


def p_equiv(lam: KGraph, a: tuple, b: tuple) -> bool:
    """``(x, (m, n)) ∼ (y, (p, q))``: same segment, same entry excess, same degree."""
    (x, (m, n)), (y, (p, q)) = a, b
    dx, dy = kdegree(lam, x), kdegree(lam, y)
    sx = ksegment(lam, x, meet(m, dx), meet(n, dx))
    sy = ksegment(lam, y, meet(p, dy), meet(q, dy))
    return (
        sx.edges == sy.edges
        and sx.r(lam) == sy.r(lam)
        and sub(m, meet(m, dx)) == sub(p, meet(p, dy))
        and sub(n, m) == sub(q, p)
    )


def identity(v: DesourcedVertexClass) -> DesourcedMorphismClass:
    return DesourcedMorphismClass(v.x, v.m, v.m, v.lam)


def _splice(lam: KGraph, head: FinitePath, y, p: Degree):
    """``head sigma^p(y)``."""
    rest = kshift(lam, y, p)
    if isinstance(rest, FinitePath):
        return lam.compose(head, rest)
    return KInf(lam.compose(head, rest.prefix), rest.tail, rest.shift, graph=lam)


def compose_tilde(a: DesourcedMorphismClass, b: DesourcedMorphismClass) -> DesourcedMorphismClass:
    """``[x;(m,n)] ∘ [y;(p,q)] = [z;(m, n+q-p)]`` with ``z = x(0, n ^ d(x)) sigma^{p ^ d(y)}(y)``."""
    lam = a.lam
    if a.source != b.range:
        raise ValueError("classes are not composable")
    x, y = a.x, b.x
    nx_ = meet(a.n, kdegree(lam, x))
    py = meet(b.m, kdegree(lam, y))
    z = _splice(lam, kprefix(lam, x, nx_), y, py)
    return DesourcedMorphismClass(z, a.m, sub(add(a.n, b.n), b.m), lam)


# -- kappa ----------------------------------------------------------------------


class KappaPath:
    """``kappa(x)`` (optionally shifted by ``offset``): queried segment by segment."""

    def __init__(self, lam: KGraph, x, offset: Degree | None = None):
        self.lam = lam
        self.x = x
        self.offset = offset or (0,) * lam.k

    @property
    def degree(self) -> Degree:
        return (INF,) * self.lam.k

    def vertex(self, m: Degree) -> DesourcedVertexClass:
        return DesourcedVertexClass(self.x, add(self.offset, m), self.lam)

    def segment(self, m: Degree, n: Degree) -> DesourcedMorphismClass:
        return DesourcedMorphismClass(self.x, add(self.offset, m), add(self.offset, n), self.lam)

    def shift(self, n: Degree) -> "KappaPath":
        return KappaPath(self.lam, self.x, add(self.offset, n))

    def window_keys(self, box: Degree) -> tuple:
        """Vertex and unit-edge keys at every position below ``box``."""
        k = self.lam.k
        out = []
        for m in itertools.product(*(range(b + 1) for b in box)):
            out.append(self.vertex(m).key)
            for i in range(k):
                out.append(self.segment(m, add(m, unit(k, i))).key)
        return tuple(out)


def kappa(lam: KGraph, x) -> KappaPath:
    """``kappa(x)`` for a boundary path ``x``; anything else is rejected."""
    v = boundary_member(lam, x)
    if v.value != "Yes":
        raise ValueError(f"not a boundary path ({v.value}): {x}")
    return KappaPath(lam, x)


def _window(lam: KGraph, *paths) -> Degree:
    """Box beyond which the keys of the given paths repeat (prefixes, two tail periods, two excess steps)."""
    k = lam.k
    w = [2] * k
    for x in paths:
        if isinstance(x, FinitePath):
            d = lam.degree(x)
            w = [max(w[i], d[i] + 2) for i in range(k)]
        else:
            dp, dt = lam.degree(x.prefix), lam.degree(x.tail)
            w = [max(w[i], dp[i] + 2 * dt[i] + 2) for i in range(k)]
    return tuple(w)


def kappa_shift_equivalent(lam: KGraph, x, y, n: Degree) -> dict | None:
    """A witness ``m`` with ``sigma^m kappa(x) = sigma^{m-n} kappa(y)`` on the repeating window, or None."""
    k = lam.k
    w = _window(lam, x, y)
    box = tuple(2 * c for c in w)
    lo = tuple(max(0, c) for c in n)
    memo: dict[tuple, tuple] = {}

    def keys(z, pos: Degree) -> tuple:
        # vertex and unit-edge keys of kappa(z) at ``pos``
        if (z, pos) not in memo:
            memo[(z, pos)] = (DesourcedVertexClass(z, pos, lam).key,) + tuple(
                DesourcedMorphismClass(z, pos, add(pos, unit(k, i)), lam).key for i in range(k)
            )
        return memo[(z, pos)]

    cells = list(itertools.product(*(range(b + 1) for b in box)))
    for q in itertools.product(*(range(c + 1) for c in w)):
        m = add(lo, q)
        mn = sub(m, n)
        if all(keys(x, add(m, a)) == keys(y, add(mn, a)) for a in cells):
            return {"m": m}
    return None


# -- the desourced k-graph --------------------------------------------------------


class DesourcedKGraph:
    """Lazily materialized classes of a row-finite k-graph.

    Boundary representatives come from the finite path list (finite acyclic
    inputs) or from the representable boundary family of the given scope.
    """

    def __init__(self, lam: KGraph, scope: int = 3):
        self.lam = lam
        self.scope = scope
        self._cache: dict[tuple, "Truncation"] = {}

    def roots(self, starts: list[str]) -> list:
        lam = self.lam
        if lam.finite and lam.acyclic:
            want = set(starts)
            return [x for x in boundary_paths_finite(lam) if x.r(lam) in want]
        from .classify import boundary_family

        fam = boundary_family(lam, self.scope, starts=starts)
        return fam["inf"] + fam["finite"]

    def iota_vertex(self, v: str) -> str:
        return f"{v}~{_fmt((0,) * self.lam.k)}"

    def iota_edge(self, e: str) -> str:
        lam = self.lam
        d = lam.degree((e,))
        return f"{e}~{_fmt((0,) * lam.k)}~{_fmt(d)}"

    def truncation(self, bound: Degree, columns: range | None = None) -> "Truncation":
        key = (tuple(bound), (columns.start, columns.stop) if columns is not None else None)
        if key not in self._cache:
            self._cache[key] = materialize_truncation(self.lam, bound, columns, self)
        return self._cache[key]


@dataclass
class Truncation:
    """All classes with representative offsets below ``bound`` over the chosen root vertices."""

    lam: KGraph
    bound: Degree
    starts: list[str]
    vertices: dict[str, DesourcedVertexClass]
    edges: dict[str, DesourcedMorphismClass]
    squares: list[tuple]
    interior: set[str]
    iota: dict[str, str]
    missing: list[str]

    def fragment(self) -> KGraph:
        verts = sorted(self.vertices)
        es = [Edge(n, c.range.name, c.source.name) for n, c in sorted(self.edges.items())]
        colors = {n: c.degree.index(1) + 1 for n, c in self.edges.items()}
        return KGraph(self.lam.k, DirectedGraph(verts, es), colors, sorted(set(self.squares)), name="desourced")

    def sourceless_interior(self) -> list[str]:
        """Interior vertex classes missing an incoming edge of some color (should be empty)."""
        frag = self.fragment()
        return sorted(v for v in self.interior if any(not frag.receives(v, i) for i in range(1, self.lam.k + 1)))

    def column_counts(self) -> dict[int, tuple[int, int]]:
        """Vertex and edge classes per column of the base vertex (periodic inputs)."""
        lam = self.lam
        out: dict[int, list[int]] = {}
        for c in self.vertices.values():
            out.setdefault(lam.col(c.key[0]), [0, 0])[0] += 1
        for c in self.edges.values():
            out.setdefault(lam.col(c.range.key[0]), [0, 0])[1] += 1
        return {k: tuple(v) for k, v in sorted(out.items())}

    def to_dict(self) -> dict:
        return {"fragment": self.fragment().to_dict(), "iota": dict(sorted(self.iota.items()))}


def materialize_truncation(
    lam: KGraph, bound: Degree, columns: range | None = None, ds: DesourcedKGraph | None = None
) -> Truncation:
    """The classes ``[x; m]`` and ``[x; (m, m + e_i)]`` with ``m + e_i <= bound``.

    Roots are boundary paths from every vertex (finite inputs) or from the
    vertices in ``columns`` (periodic inputs).
    """
    ds = ds or DesourcedKGraph(lam, scope=max(bound))
    k = lam.k
    bound = tuple(bound)
    if lam.finite:
        starts = list(lam.vertices)
    else:
        g = lam.sk
        cols = columns if columns is not None else range(g.origin, g.c0 + g.period)
        starts = [f"{t}_{c}" for c in cols for t in g.tracks]
    roots = ds.roots(starts)
    have = {x.r(lam) if isinstance(x, FinitePath) else x.prefix.r(lam) for x in roots}
    missing = sorted(set(starts) - have)
    vertices: dict[str, DesourcedVertexClass] = {}
    edges: dict[str, DesourcedMorphismClass] = {}
    squares: list[tuple] = []
    interior: set[str] = set()
    ones = (1,) * k
    for x in roots:
        for m in itertools.product(*(range(b + 1) for b in bound)):
            v = DesourcedVertexClass(x, m, lam)
            vertices.setdefault(v.name, v)
            if leq(add(m, ones), bound):
                interior.add(v.name)
            for i in range(k):
                n = add(m, unit(k, i))
                if leq(n, bound):
                    e = DesourcedMorphismClass(x, m, n, lam)
                    edges.setdefault(e.name, e)
            for i, j in itertools.combinations(range(k), 2):
                top = add(add(m, unit(k, i)), unit(k, j))
                if not leq(top, bound):
                    continue
                mi, mj = add(m, unit(k, i)), add(m, unit(k, j))
                left = (DesourcedMorphismClass(x, m, mi, lam).name, DesourcedMorphismClass(x, mi, top, lam).name)
                right = (DesourcedMorphismClass(x, m, mj, lam).name, DesourcedMorphismClass(x, mj, top, lam).name)
                squares.append((left, right))
    iota = {}
    for v in starts:
        if ds.iota_vertex(v) in vertices:
            iota[v] = ds.iota_vertex(v)
    for c in edges.values():
        (r, es), exc, deg = c.key
        if len(es) == 1 and not any(exc):
            iota[es[0]] = c.name
    return Truncation(lam, bound, starts, vertices, edges, squares, interior, iota, missing)
