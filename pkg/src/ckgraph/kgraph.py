"""k-graphs presented by a colored skeleton and factorization squares.

A square ``((a, b), (c, d))`` records the relation ``ab = cd`` between two
bicolored paths with ``color(a) == color(d)`` and ``color(b) == color(c)``.
Morphisms are stored in color-normal form: all color-1 edges first, then
color-2 edges, and so on.  Paths read range to source as for directed graphs.

Two presentations are supported:

* finite: an explicit :class:`~ckgraph.digraph.DirectedGraph` with a color map
  and an explicit list of squares;
* periodic: a :class:`~ckgraph.digraph.ColumnTemplate` whose templates carry
  colors, together with square templates that are instantiated at every index.

Boundary paths are finite morphisms or :class:`KInf` values
``prefix tail T^t(tail) T^2t(tail) ...`` where ``T`` translates columns.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable

import networkx as nx

from .digraph import ColumnTemplate, DirectedGraph, Edge, Template, find_cycles, vname
from .paths import FinitePath
from .verdict import Findings, Verdict, no, unknown, yes

INF = math.inf

Degree = tuple


def join(a: Degree, b: Degree) -> Degree:
    return tuple(max(x, y) for x, y in zip(a, b))


def meet(a: Degree, b: Degree) -> Degree:
    return tuple(min(x, y) for x, y in zip(a, b))


def add(a: Degree, b: Degree) -> Degree:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Degree, b: Degree) -> Degree:
    return tuple(x - y for x, y in zip(a, b))


def leq(a: Degree, b: Degree) -> bool:
    return all(x <= y for x, y in zip(a, b))


def unit(k: int, i: int) -> Degree:
    return tuple(1 if j == i else 0 for j in range(k))


class KGraph:
    """A row-finite k-graph (finite or periodic presentation)."""

    def __init__(
        self,
        k: int,
        skeleton: DirectedGraph | ColumnTemplate,
        colors: dict[str, int] | None = None,
        squares: Iterable = (),
        square_templates: Iterable = (),
        name: str | None = None,
    ):
        self.k = k
        self.sk = skeleton
        self.name = name
        self.colors = dict(colors or {})
        self.square_list = [((a, b), (c, d)) for (a, b), (c, d) in squares]
        self.square_templates = [tuple(tuple(tuple(p) for p in side) for side in st) for st in square_templates]
        self._sq: dict[tuple[str, str], tuple[str, str]] = {}
        self._dup: list[tuple[str, str]] = []
        for left, right in self.square_list:
            for a, b in ((left, right), (right, left)):
                if a in self._sq and self._sq[a] != b:
                    self._dup.append(a)
                self._sq[a] = b
        self._sqt: dict[tuple[str, str, int], list] = defaultdict(list)
        for left, right in self.square_templates:
            for a, b in ((left, right), (right, left)):
                (ta, oa), (tb, ob) = a
                self._sqt[(ta, tb, ob - oa)].append((a, b))

    # -- documents -------------------------------------------------------
    @classmethod
    def from_dict(cls, doc: dict) -> "KGraph":
        if "tracks" in doc:
            sk = ColumnTemplate.from_dict(doc)
            return cls(int(doc["k"]), sk, square_templates=doc.get("square_templates", []), name=doc.get("name"))
        try:
            k = int(doc["k"])
        except KeyError:
            raise ValueError("k-graph document: missing field 'k'") from None
        g = DirectedGraph.from_dict(doc)
        colors = {}
        for i, e in enumerate(doc.get("edges", [])):
            if "color" not in e:
                raise ValueError(f"edges[{i}]: missing field 'color'")
            colors[str(e["id"])] = int(e["color"])
        squares = []
        for i, sq in enumerate(doc.get("squares", [])):
            try:
                (a, b), (c, d) = sq
            except (TypeError, ValueError):
                raise ValueError(f"squares[{i}]: expected [[a,b],[c,d]]") from None
            squares.append(((str(a), str(b)), (str(c), str(d))))
        return cls(k, g, colors, squares, name=doc.get("name"))

    def to_dict(self) -> dict:
        if self.periodic:
            out = {"k": self.k, **self.sk.to_dict()}
            out["square_templates"] = [[[list(p) for p in side] for side in st] for st in self.square_templates]
            return out
        base = self.sk.to_dict()
        for e in base["edges"]:
            e["color"] = self.colors.get(e["id"])
        out = {"k": self.k, **base, "squares": [[list(a), list(b)] for a, b in sorted(self.square_list)]}
        if self.name:
            out["name"] = self.name
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, KGraph) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return id(self)

    def __repr__(self) -> str:
        return f"KGraph(k={self.k}, {self.name or self.sk!r})"

    # -- skeleton access -------------------------------------------------
    @property
    def periodic(self) -> bool:
        return isinstance(self.sk, ColumnTemplate)

    @property
    def finite(self) -> bool:
        return not self.periodic

    def color(self, e: str) -> int:
        return self.sk.color(e) if self.periodic else self.colors[e]

    def r(self, e: str) -> str:
        return self.sk.r(e)

    def s(self, e: str) -> str:
        return self.sk.s(e)

    def edges_into(self, v: str, color: int | None = None) -> tuple[str, ...]:
        es = self.sk.edges_into(v)
        return es if color is None else tuple(e for e in es if self.color(e) == color)

    def col(self, v: str) -> int:
        return self.sk.col(v)

    @cached_property
    def vertices(self) -> list[str]:
        """All vertices (finite) or a window of vertices covering every translation class."""
        if self.finite:
            return sorted(self.sk.vertices)
        g = self.sk
        hi = g.c0 + 2 * g.period
        return [vname(t, c) for c in range(g.origin, hi + 1) for t in g.tracks]

    def translate_vertex(self, v: str, t: int) -> str:
        return v if t == 0 else self.sk.translate_vertex(v, t)

    def translate_edges(self, es: Iterable[str], t: int) -> tuple[str, ...]:
        return tuple(es) if t == 0 else tuple(self.sk.translate_edge(e, t) for e in es)

    # -- squares ---------------------------------------------------------
    def square(self, a: str, b: str) -> tuple[str, str] | None:
        """The other side of the square containing the bicolored path ``ab``."""
        if self.finite:
            return self._sq.get((a, b))
        try:
            ta, ia = a.rsplit("_", 1)
            tb, ib = b.rsplit("_", 1)
            ia, ib = int(ia), int(ib)
        except ValueError:
            return None
        for ((_, oa), _), ((tc, oc), (td, od)) in self._sqt.get((ta, tb, ib - ia), ()):
            i = ia - oa
            c, d = f"{tc}_{i + oc}", f"{td}_{i + od}"
            if self._instance(c) and self._instance(d):
                return c, d
        return None

    def _instance(self, e: str) -> bool:
        tid, i = e.rsplit("_", 1)
        tpl = self.sk._tpl.get(tid)
        return tpl is not None and self.sk.valid_index(tpl, int(i))

    # -- morphisms -------------------------------------------------------
    def degree(self, mu: FinitePath | Iterable[str]) -> Degree:
        es = mu.edges if isinstance(mu, FinitePath) else mu
        d = [0] * self.k
        for e in es:
            d[self.color(e) - 1] += 1
        return tuple(d)

    def vertex(self, v: str) -> FinitePath:
        return FinitePath((), v, graph=self)

    def morph(self, edges: Iterable[str], at: str | None = None) -> FinitePath:
        es = tuple(edges)
        if not es:
            return FinitePath((), at, graph=self)
        return FinitePath(self.reorder(es, sorted(self.color(e) for e in es)), graph=self)

    def reorder(self, edges: tuple[str, ...], target: list[int]) -> tuple[str, ...]:
        """Rewrite a path so its color word is ``target`` (a permutation of its colors)."""
        seq = list(edges)
        for i, want in enumerate(target):
            if self.color(seq[i]) == want:
                continue
            j = next(j for j in range(i + 1, len(seq)) if self.color(seq[j]) == want)
            while j > i:
                pair = self.square(seq[j - 1], seq[j])
                if pair is None:
                    raise ValueError(f"no square for {seq[j - 1]} {seq[j]}")
                seq[j - 1], seq[j] = pair
                j -= 1
        return tuple(seq)

    def compose(self, *mus: FinitePath) -> FinitePath:
        es = tuple(e for m in mus for e in m.edges)
        at = mus[0].r(self) if mus else None
        return self.morph(es, at)

    def factor(self, mu: FinitePath, m: Degree) -> tuple[FinitePath, FinitePath]:
        """``(mu(0, m), mu(m, d(mu)))``."""
        d = self.degree(mu)
        if not leq(m, d):
            raise IndexError(f"{m} is not below the degree {d}")
        rest = sub(d, m)
        word = [i + 1 for i in range(self.k) for _ in range(m[i])]
        word += [i + 1 for i in range(self.k) for _ in range(rest[i])]
        if not mu.edges:
            return mu, mu
        es = self.reorder(mu.edges, word)
        n = sum(m)
        head = FinitePath(es[:n], graph=self) if n else FinitePath((), mu.r(self), graph=self)
        tail = FinitePath(es[n:], graph=self) if n < len(es) else FinitePath((), mu.s(self), graph=self)
        return head, tail

    def segment(self, mu: FinitePath, m: Degree, n: Degree) -> FinitePath:
        return self.factor(self.factor(mu, n)[0], m)[1]

    def enumerate_morphisms(self, v: str, m: Degree) -> list[FinitePath]:
        """``v Lambda^m`` in normal form."""
        word = [i + 1 for i in range(self.k) for _ in range(m[i])]
        out = []

        def walk(w: str, i: int, acc: tuple[str, ...]) -> None:
            if i == len(word):
                out.append(FinitePath(acc, graph=self) if acc else self.vertex(v))
                return
            for e in self.edges_into(w, word[i]):
                walk(self.s(e), i + 1, acc + (e,))

        walk(v, 0, ())
        return out

    def morphisms_below(self, v: str, bound: Degree) -> list[FinitePath]:
        out = []
        for m in itertools.product(*(range(b + 1) for b in bound)):
            out.extend(self.enumerate_morphisms(v, m))
        return out

    def lambda_min(self, mu: FinitePath, nu: FinitePath) -> set[tuple[FinitePath, FinitePath]]:
        """Minimal common extensions ``(alpha, beta)`` with ``mu alpha = nu beta``."""
        if mu.r(self) != nu.r(self):
            return set()
        dm, dn = self.degree(mu), self.degree(nu)
        top = join(dm, dn)
        lefts = {self.compose(mu, a).edges: a for a in self.enumerate_morphisms(mu.s(self), sub(top, dm))}
        out = set()
        for b in self.enumerate_morphisms(nu.s(self), sub(top, dn)):
            key = self.compose(nu, b).edges
            if key in lefts:
                out.add((lefts[key], b))
        if top == tuple([0] * self.k):
            out = {(self.vertex(mu.s(self)), self.vertex(nu.s(self)))}
        return out

    # -- structure -------------------------------------------------------
    def receives(self, v: str, color: int) -> bool:
        return bool(self.edges_into(v, color))

    def total_source(self, v: str) -> bool:
        return not self.edges_into(v)

    @cached_property
    def acyclic(self) -> bool:
        if self.periodic:
            g = self.sk
            drift0 = [t for t in g.templates if t.drift == 0]
            dg = nx.DiGraph()
            dg.add_edges_from((t.r_track, t.s_track) for t in drift0)
            return nx.is_directed_acyclic_graph(dg) and not any(t.drift < 0 for t in g.templates)
        return not find_cycles(self.sk).cycles

    @cached_property
    def moving_colors(self) -> frozenset[int]:
        """Colors along which an infinite path can travel (every color on finite presentations)."""
        if self.finite:
            return frozenset(range(1, self.k + 1))
        return frozenset(t.color for t in self.sk.templates if t.drift > 0)

    @cached_property
    def sourceless(self) -> bool:
        return all(self.receives(v, i) for v in self.vertices for i in range(1, self.k + 1))


# ---------------------------------------------------------------------------
# builders


def omega(k: int, m: Iterable) -> KGraph:
    """The grid k-graph ``Omega_{k,m}``; at most one coordinate of ``m`` may be infinite.

    Edges of color ``i`` run from ``p`` to ``p + e_i`` with ``r = p``.
    """
    m = tuple(INF if (x == "inf" or x == INF) else int(x) for x in m)
    if len(m) != k:
        raise ValueError("m must have k entries")
    infs = [i for i, x in enumerate(m) if x == INF]
    if len(infs) > 1:
        raise ValueError("at most one infinite coordinate is supported")
    if not infs:
        pts = list(itertools.product(*(range(x + 1) for x in m)))
        name = lambda p: ",".join(map(str, p))
        edges, colors = [], {}
        for p in pts:
            for i in range(k):
                q = tuple(p[j] + (j == i) for j in range(k))
                if q[i] <= m[i]:
                    eid = f"e{i + 1}[{name(p)}]"
                    edges.append(Edge(eid, name(p), name(q)))
                    colors[eid] = i + 1
        squares = []
        for p in pts:
            for i, j in itertools.combinations(range(k), 2):
                pi = tuple(p[t] + (t == i) for t in range(k))
                pj = tuple(p[t] + (t == j) for t in range(k))
                if pi[i] <= m[i] and pj[j] <= m[j] and p[i] + 1 <= m[i] and p[j] + 1 <= m[j]:
                    a, b = f"e{i + 1}[{name(p)}]", f"e{j + 1}[{name(pi)}]"
                    c, d = f"e{j + 1}[{name(p)}]", f"e{i + 1}[{name(pj)}]"
                    squares.append(((a, b), (c, d)))
        g = DirectedGraph([name(p) for p in pts], edges)
        return KGraph(k, g, colors, squares, name=f"omega_{k}_{m}")
    ic = infs[0]
    others = [i for i in range(k) if i != ic]
    rows = list(itertools.product(*(range(m[i] + 1) for i in others)))
    rname = lambda row: "r" + "x".join(map(str, row)) if row else "r"
    templates, stpl = [], []
    for row in rows:
        templates.append(Template(f"e{ic + 1}{rname(row)}", rname(row), 0, rname(row), 1, color=ic + 1))
        for pos, i in enumerate(others):
            if row[pos] + 1 <= m[i]:
                nxt = tuple(row[t] + (t == pos) for t in range(len(row)))
                templates.append(Template(f"e{i + 1}{rname(row)}", rname(row), 0, rname(nxt), 0, color=i + 1))
    tids = {t.id for t in templates}
    for row in rows:
        for pos_i, pos_j in itertools.combinations(range(k), 2):
            i, j = pos_i, pos_j

            def edge_t(color_idx: int, r: tuple) -> tuple[str, int] | None:
                # template id for the color-(color_idx+1) edge at row r
                tid = f"e{color_idx + 1}{rname(r)}"
                return tid if tid in tids else None

            def step(r: tuple, color_idx: int) -> tuple[tuple, int]:
                if color_idx == ic:
                    return r, 1
                pos = others.index(color_idx)
                return tuple(r[t] + (t == pos) for t in range(len(r))), 0

            ri, oi = step(row, i)
            rj, oj = step(row, j)
            a, b = edge_t(i, row), edge_t(j, ri)
            c, d = edge_t(j, row), edge_t(i, rj)
            if None in (a, b, c, d):
                continue
            stpl.append((((a, 0), (b, oi)), ((c, 0), (d, oj))))
    ct = ColumnTemplate([rname(r) for r in rows], templates, name=f"omega_{k}")
    return KGraph(k, ct, square_templates=stpl, name=f"omega_{k}_{tuple('inf' if x == INF else x for x in m)}")


def product_kgraph(e: DirectedGraph, f: DirectedGraph) -> KGraph:
    """The product 2-graph ``Lambda_E x Lambda_F`` (color 1 from ``E``, color 2 from ``F``)."""
    vs = [f"{v}|{w}" for v in sorted(e.vertices) for w in sorted(f.vertices)]
    edges, colors, squares = [], {}, []
    for a in sorted(e.edges):
        for w in sorted(f.vertices):
            eid = f"{a.id}|{w}"
            edges.append(Edge(eid, f"{a.r}|{w}", f"{a.s}|{w}"))
            colors[eid] = 1
    for b in sorted(f.edges):
        for v in sorted(e.vertices):
            eid = f"{v}|{b.id}"
            edges.append(Edge(eid, f"{v}|{b.r}", f"{v}|{b.s}"))
            colors[eid] = 2
    for a in sorted(e.edges):
        for b in sorted(f.edges):
            # (a, r(b)) (s(a), b) = (r(a), b) (a, s(b))
            squares.append(((f"{a.id}|{b.r}", f"{a.s}|{b.id}"), (f"{a.r}|{b.id}", f"{a.id}|{b.s}")))
    return KGraph(2, DirectedGraph(vs, edges), colors, squares, name="product")


def graph_as_kgraph(g: DirectedGraph) -> KGraph:
    """A directed graph viewed as a 1-graph."""
    return KGraph(1, g, {e.id: 1 for e in g.edges}, name="1-graph")


# ---------------------------------------------------------------------------
# validation


def validate_kgraph(lam: KGraph) -> Findings:
    """Check that the squares give the factorization property.

    Reports bad endpoints or colors (``bad_square``), a bicolored path in two
    squares (``duplicate_square``), a bicolored path in none
    (``missing_square``) and, for k >= 3, tricolored paths whose two
    normalizations disagree (``cube_failure``).
    """
    rep = Findings()
    if lam.finite:
        for e in lam.sk.edges:
            c = lam.colors.get(e.id)
            if c is None or not 1 <= c <= lam.k:
                rep.add("bad_color", edge=e.id)
        if not rep.valid:
            return rep
        seen = set()
        for left, right in lam.square_list:
            for side in (left, right):
                if side in seen:
                    rep.add("duplicate_square", path=list(side))
                seen.add(side)
            _check_square(lam, left, right, rep)
    else:
        for st in lam.square_templates:
            for side in st:
                for tid, _ in side:
                    if tid not in lam.sk._tpl:
                        rep.add("bad_square", path=[t for t, _ in side])
    if not rep.valid:
        return rep
    verts = lam.vertices
    for v in verts:
        for a in lam.edges_into(v):
            for b in lam.edges_into(lam.s(a)):
                if lam.color(a) == lam.color(b):
                    continue
                other = lam.square(a, b)
                if other is None:
                    rep.add("missing_square", path=[a, b])
                elif lam.periodic:
                    _check_square(lam, (a, b), other, rep)
                    if lam.square(*other) != (a, b):
                        rep.add("duplicate_square", path=[a, b])
    if lam.k >= 3 and rep.valid:
        for v in verts:
            for a in lam.edges_into(v):
                for b in lam.edges_into(lam.s(a)):
                    for c in lam.edges_into(lam.s(b)):
                        cols = {lam.color(a), lam.color(b), lam.color(c)}
                        if len(cols) == 3 and len(_normalizations(lam, (a, b, c))) > 1:
                            rep.add("cube_failure", path=[a, b, c])
    return rep


def _check_square(lam: KGraph, left, right, rep: Findings) -> None:
    (a, b), (c, d) = left, right
    try:
        ok = (
            lam.s(a) == lam.r(b)
            and lam.s(c) == lam.r(d)
            and lam.r(a) == lam.r(c)
            and lam.s(b) == lam.s(d)
            and lam.color(a) == lam.color(d) != lam.color(b) == lam.color(c)
        )
    except KeyError:
        ok = False
    if not ok:
        rep.add("bad_square", path=[a, b], other=[c, d])


def _normalizations(lam: KGraph, path: tuple[str, ...]) -> set[tuple[str, ...]]:
    """Every color-sorted word reachable from ``path`` by square swaps."""
    seen = {path}
    todo = [path]
    while todo:
        p = todo.pop()
        for i in range(len(p) - 1):
            if lam.color(p[i]) > lam.color(p[i + 1]):
                other = lam.square(p[i], p[i + 1])
                if other is None:
                    continue
                q = p[:i] + other + p[i + 2:]
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
    return {p for p in seen if [lam.color(e) for e in p] == sorted(lam.color(e) for e in p)}


# ---------------------------------------------------------------------------
# exhaustive sets, local convexity


def is_exhaustive(lam: KGraph, v: str, D: Iterable[FinitePath], budget: int | None = None) -> Verdict:
    """Whether every ``mu`` in ``v Lambda`` has a common extension with some member of ``D``.

    Exact on finite acyclic k-graphs (all of ``v Lambda`` is enumerated).
    Elsewhere ``mu`` is searched up to degree ``budget`` in every coordinate;
    a failure is a genuine No, and passing the search gives Unknown.
    """
    D = list(D)
    if any(d.r(lam) != v for d in D):
        raise ValueError("D must lie in v Lambda")
    if lam.finite and lam.acyclic:
        mus = _all_from(lam, v)
        exact = True
    else:
        b = budget if budget is not None else 3
        mus = lam.morphisms_below(v, (b,) * lam.k)
        exact = False
    for mu in mus:
        if not any(lam.lambda_min(mu, nu) for nu in D):
            return no({"mu": mu})
    return yes() if exact else unknown("degree bound", budget)


def _all_from(lam: KGraph, v: str) -> list[FinitePath]:
    out = []
    bound = tuple(len(lam.sk.vertices) for _ in range(lam.k))
    for m in itertools.product(*(range(b + 1) for b in bound)):
        ms = lam.enumerate_morphisms(v, m)
        out.extend(ms)
    return out


def locally_convex(lam: KGraph) -> bool:
    """No ``lambda`` of color i and ``mu`` of color j != i at the same range with
    ``s(lambda)`` receiving no color j or ``s(mu)`` receiving no color i."""
    if lam.k == 1:
        return True
    for v in lam.vertices:
        es = lam.edges_into(v)
        for a in es:
            for b in es:
                i, j = lam.color(a), lam.color(b)
                if i != j and not lam.receives(lam.s(a), j):
                    return False
    return True


# ---------------------------------------------------------------------------
# boundary paths


@dataclass(frozen=True)
class KInf:
    """The path ``prefix tail T^t(tail) T^{2t}(tail) ...``.

    ``shift = 0`` gives an ultimately periodic path (``r(tail) == s(tail)``);
    on periodic k-graphs ``shift = t > 0`` means ``s(tail) = T^t(r(tail))``.
    """

    prefix: FinitePath
    tail: FinitePath
    shift: int = 0
    graph: KGraph = field(default=None, compare=False, repr=False, hash=False)

    def check(self, lam: KGraph) -> None:
        if not self.tail.edges:
            raise ValueError("tail must have nonzero degree")
        if self.prefix.s(lam) != self.tail.r(lam):
            raise ValueError("prefix and tail do not compose")
        if lam.translate_vertex(self.tail.r(lam), self.shift) != self.tail.s(lam):
            raise ValueError("tail does not close up under the translation")

    def __str__(self) -> str:
        return f"{self.prefix} ; {self.tail}" + (f" ; T{self.shift}" if self.shift else "")

    def to_dict(self) -> str:
        return str(self)


KPath = FinitePath | KInf


def kdegree(lam: KGraph, x: KPath) -> Degree:
    if isinstance(x, FinitePath):
        return lam.degree(x)
    dp, dt = lam.degree(x.prefix), lam.degree(x.tail)
    return tuple(INF if dt[i] else dp[i] for i in range(lam.k))


def _unroll(lam: KGraph, x: KInf, j: int) -> FinitePath:
    parts = [x.prefix] + [
        FinitePath(lam.translate_edges(x.tail.edges, i * x.shift), graph=lam) for i in range(j)
    ]
    return lam.compose(*parts)


def _copies_for(lam: KGraph, x: KInf, n: Degree) -> int:
    dp, dt = lam.degree(x.prefix), lam.degree(x.tail)
    j = 0
    for i in range(lam.k):
        if dt[i]:
            j = max(j, math.ceil(max(0, n[i] - dp[i]) / dt[i]))
    return j


def kprefix(lam: KGraph, x: KPath, n: Degree) -> FinitePath:
    """``x(0, n)``."""
    if not leq(n, kdegree(lam, x)):
        raise IndexError(f"{n} exceeds the degree of the path")
    if isinstance(x, FinitePath):
        return lam.factor(x, n)[0]
    return lam.factor(_unroll(lam, x, _copies_for(lam, x, n)), n)[0]


def ksegment(lam: KGraph, x: KPath, m: Degree, n: Degree) -> FinitePath:
    """``x(m, n)`` for finite ``m <= n <= d(x)``."""
    return lam.factor(kprefix(lam, x, n), m)[1]


def kvertex(lam: KGraph, x: KPath, n: Degree) -> str:
    return kprefix(lam, x, n).s(lam)


def kshift(lam: KGraph, x: KPath, m: Degree) -> KPath:
    """``sigma^m(x)``."""
    if isinstance(x, FinitePath):
        return lam.factor(x, m)[1]
    j = _copies_for(lam, x, m)
    rest = lam.factor(_unroll(lam, x, j), m)[1]
    tail = FinitePath(lam.translate_edges(x.tail.edges, j * x.shift), graph=lam)
    return KInf(rest, tail, x.shift, graph=lam)


def kequal(lam: KGraph, x: KPath, y: KPath) -> bool:
    """Path equality.

    Two paths of the same degree that are eventually periodic agree everywhere
    once they agree on the box up to ``N + 2(a + b)`` (``N`` the larger prefix
    degree, ``a``, ``b`` the tail degrees), by the usual two-period argument
    applied along each coordinate direction.
    """
    d = kdegree(lam, x)
    if d != kdegree(lam, y):
        return False
    if isinstance(x, FinitePath):
        return x.edges == y.edges and x.r(lam) == y.r(lam)
    if x.prefix.r(lam) != y.prefix.r(lam):
        return False
    n = join(lam.degree(x.prefix), lam.degree(y.prefix))
    a, b = lam.degree(x.tail), lam.degree(y.tail)
    top = tuple(d[i] if d[i] != INF else n[i] + 2 * (a[i] + b[i]) for i in range(lam.k))
    return kprefix(lam, x, top).edges == kprefix(lam, y, top).edges


def kshift_equivalent(lam: KGraph, x: KPath, y: KPath, n: Degree) -> dict | None:
    """A witness ``m`` with ``sigma^m(x) = sigma^{m-n}(y)``, or None.

    Finite coordinates force ``n = d(x) - d(y)`` there; along infinite
    coordinates ``m`` is searched past both prefixes and over two tail periods.
    """
    dx, dy = kdegree(lam, x), kdegree(lam, y)
    if any((dx[i] == INF) != (dy[i] == INF) for i in range(lam.k)):
        return None
    base = []
    for i in range(lam.k):
        if dx[i] != INF:
            if n[i] != dx[i] - dy[i]:
                return None
            base.append(dx[i])
        else:
            px = lam.degree(x.prefix)[i]
            py = lam.degree(y.prefix)[i]
            base.append(max(px, py + n[i], n[i], 0))
    if all(dx[i] != INF for i in range(lam.k)):
        m = tuple(base)
        if kvertex(lam, x, m) == kvertex(lam, y, sub(m, n)):
            return {"m": m}
        return None
    span = [lam.degree(x.tail)[i] + lam.degree(y.tail)[i] if dx[i] == INF else 0 for i in range(lam.k)]
    for q in itertools.product(*(range(s + 1) for s in span)):
        m = add(tuple(base), q)
        if kequal(lam, kshift(lam, x, m), kshift(lam, y, sub(m, n))):
            return {"m": m}
    return None


def klag_search(lam: KGraph, x: KPath, y: KPath, box: int) -> list[Degree]:
    """Lags ``n`` with ``x ~_n y``: forced finite coordinates, infinite ones in ``[-box, box]``."""
    dx, dy = kdegree(lam, x), kdegree(lam, y)
    ranges = [range(-box, box + 1) if dx[i] == INF else [dx[i] - dy[i]] for i in range(lam.k)]
    found = [n for n in itertools.product(*ranges) if kshift_equivalent(lam, x, y, n) is not None]
    # smallest first; among equal sizes the lexicographically largest
    return sorted(found, key=lambda n: (sum(abs(c) for c in n), tuple(-c for c in n)))


def _tail_window(lam: KGraph, x: KInf, reps: int = 2) -> list[Degree]:
    """Positions past the prefix along infinite coordinates, covering every translation class."""
    dp, dt = lam.degree(x.prefix), lam.degree(x.tail)
    j = reps
    if lam.periodic and x.shift:
        c = lam.col(x.tail.r(lam))
        j = max(reps, math.ceil(max(0, lam.sk.c0 + lam.sk.period - c) / x.shift) + reps)
    ranges = [range(dp[i], dp[i] + j * dt[i] + 1) if dt[i] else range(dp[i] + 1) for i in range(lam.k)]
    return list(itertools.product(*ranges))


def equivariant_base(lam: KGraph, x: KInf) -> Degree:
    """A degree ``b`` with ``x(m + d(tail)) = T^t x(m)`` for all ``m >= b``.

    Write ``prefix = P0 P1`` with ``d(P0)`` the infinite-coordinate part.  If
    ``P1 tail = tail' T^t(P1)`` then ``sigma^{d(P0)}(x)`` is translation
    equivariant and ``b`` drops to zero on the finite coordinates.
    """
    dp, dt = lam.degree(x.prefix), lam.degree(x.tail)
    b0 = tuple(dp[i] if dt[i] else 0 for i in range(lam.k))
    p1 = lam.factor(x.prefix, b0)[1]
    if p1.edges:
        rest = lam.factor(lam.compose(p1, x.tail), dt)[1]
        if rest.edges == lam.translate_edges(p1.edges, x.shift):
            return b0
        return dp
    return b0


def _positions(lam: KGraph, x: KPath, reps: int = 2) -> list[Degree]:
    """Finitely many positions along ``x`` representing all of them."""
    d = kdegree(lam, x)
    if isinstance(x, FinitePath):
        return list(itertools.product(*(range(int(di) + 1) for di in d)))
    dp = lam.degree(x.prefix)
    head = [n for n in itertools.product(*(range(dp[i] + 1) for i in range(lam.k)))]
    return sorted(set(head) | set(_tail_window(lam, x, reps)))


def le_infty_member(lam: KGraph, x: KPath) -> bool:
    """Membership in ``Lambda^{<=infinity}``.

    The witness ``m`` is taken at the full finite coordinates and past the
    prefix along infinite ones; positions in the tail are checked over a
    window that covers every translation class.
    """
    d = kdegree(lam, x)
    fin = [i for i in range(lam.k) if d[i] != INF]
    if not fin:
        return True
    for n in _positions(lam, x):
        if any(n[i] != d[i] for i in fin):
            continue
        if isinstance(x, KInf) and not leq(lam.degree(x.prefix), tuple(n[i] if d[i] == INF else INF for i in range(lam.k))):
            continue
        v = kvertex(lam, x, n)
        if any(lam.receives(v, i + 1) for i in fin):
            return False
    return True


def boundary_member(lam: KGraph, x: KPath, budget: int | None = None) -> Verdict:
    """Membership in the boundary path space.

    Exact routes, in order: a finite path ending at a vertex that receives no
    edges; finite acyclic k-graphs (every exhaustive set avoiding ``X_n`` is
    contained in the finite complement, which is tested directly); locally
    convex k-graphs (where the boundary equals ``Lambda^{<=infinity}``);
    sourceless k-graphs; and otherwise a per-position certificate, either
    "every path from x(n) follows x" or an infinite ladder of exits into
    vertices that receive nothing.
    """
    if isinstance(x, FinitePath) and lam.total_source(x.s(lam)):
        return yes({"kind": "ends_at_source"})
    if lam.finite and lam.acyclic:
        return _boundary_finite_acyclic(lam, x)
    if locally_convex(lam):
        return yes({"kind": "locally_convex"}) if le_infty_member(lam, x) else no(
            {"kind": "not_in_le_infinity", "path": x}
        )
    d = kdegree(lam, x)
    if lam.sourceless and all(di == INF for di in d):
        return yes({"kind": "sourceless"})
    if isinstance(x, FinitePath):
        return unknown("finite path in a non-locally-convex graph with cycles", budget)
    certs = []
    for n in _positions(lam, x):
        c = _position_certificate(lam, x, n)
        if c is None:
            return unknown(f"no certificate at position {n}", budget)
        certs.append({"n": n, **c})
    return yes({"kind": "per_position", "positions": len(certs)})


def _position_certificate(lam: KGraph, x: KInf, n: Degree) -> dict | None:
    d = kdegree(lam, x)
    exits = []
    for m in _positions(lam, x):
        if not leq(n, m):
            continue
        v = kvertex(lam, x, m)
        for i in range(lam.k):
            step = add(m, unit(lam.k, i))
            on = _edge_at(lam, x, m, i) if leq(step, d) else None
            for e in lam.edges_into(v, i + 1):
                if e != on:
                    exits.append((m, i, e))
    if not exits:
        return {"kind": "deterministic"}
    b, dt = equivariant_base(lam, x), lam.degree(x.tail)
    periodic_ok = lam.finite or x.shift % lam.sk.period == 0
    for m, i, e in exits:
        if not (dt[i] and leq(b, m) and periodic_ok and lam.total_source(lam.s(e))):
            continue
        if lam.periodic and lam.col(kvertex(lam, x, m)) < lam.sk.c0:
            continue
        return {"kind": "ladder", "exit": e, "at": m}
    return None


def _edge_at(lam: KGraph, x: KPath, m: Degree, i: int) -> str:
    return ksegment(lam, x, m, add(m, unit(lam.k, i))).edges[0]


def _boundary_finite_acyclic(lam: KGraph, x: KPath) -> Verdict:
    d = kdegree(lam, x)
    for n in itertools.product(*(range(int(di) + 1) for di in d)):
        v = kvertex(lam, x, n)
        rest = ksegment(lam, x, n, d)
        X = {lam.factor(rest, q)[0].edges or (v,) for q in itertools.product(*(range(int(r) + 1) for r in sub(d, n)))}
        table = _extension_table(lam, v)
        ok = False
        for mu in table:
            meets = _meeting_set(lam, table, mu)
            if meets <= X:
                ok = True
                break
        if not ok:
            return no({"n": n, "vertex": v, "reason": "the complement of x(n)'s extensions is exhaustive"})
    return yes({"kind": "finite_exhaustive_test"})


def _key(mu: FinitePath) -> tuple:
    return mu.edges or (mu.at,)


def _extension_table(lam: KGraph, v: str) -> dict[tuple, dict[Degree, tuple]]:
    """For every ``lambda`` in ``v Lambda``: its prefixes indexed by degree."""
    out = {}
    for lam_ in _all_from(lam, v):
        d = lam.degree(lam_)
        pre = {}
        for q in itertools.product(*(range(di + 1) for di in d)):
            pre[q] = _key(lam.factor(lam_, q)[0])
        out[_key(lam_)] = {"deg": d, "pre": pre}
    return out


def _meeting_set(lam: KGraph, table: dict, mu_key: tuple) -> set[tuple]:
    """``{nu : Lambda^min(mu, nu) nonempty}`` from the extension table."""
    info = table[mu_key]
    dm = info["deg"]
    out = set()
    for key, t in table.items():
        if not leq(dm, t["deg"]) or t["pre"][dm] != mu_key:
            continue
        for q, pk in t["pre"].items():
            if join(dm, q) == t["deg"]:
                out.add(pk)
    return out


def boundary_paths_finite(lam: KGraph) -> list[FinitePath]:
    """All boundary paths of a finite acyclic k-graph."""
    if not (lam.finite and lam.acyclic):
        raise ValueError("needs a finite acyclic k-graph")
    out = []
    for v in lam.vertices:
        for mu in _all_from(lam, v):
            if _boundary_finite_acyclic(lam, mu).value == "Yes":
                out.append(mu)
    return out


# ---------------------------------------------------------------------------
# Cuntz-Krieger families


def _mat(rows) -> tuple[tuple, ...]:
    from fractions import Fraction

    # integers stay plain ints (exact and much faster); anything else becomes a Fraction
    return tuple(tuple(x if isinstance(x, int) else Fraction(x) for x in row) for row in rows)


def _mul(a, b):
    # representation matrices are sparse; skip zero entries
    p = len(b[0]) if b else 0
    brows = [[(j, x) for j, x in enumerate(row) if x] for row in b]
    out = []
    for row in a:
        acc = [0] * p
        for t, x in enumerate(row):
            if x:
                for j, y in brows[t]:
                    acc[j] += x * y
        out.append(tuple(acc))
    return tuple(out)


def _T(a):
    return tuple(zip(*a)) if a else a


def _sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _addm(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _zero(n):
    return tuple(tuple(0 for _ in range(n)) for _ in range(n))


def _residual(a) -> str:
    return str(max((abs(x) for row in a for x in row), default=0))


def ck_verify(graph: DirectedGraph | KGraph, family: dict, degree_bound: int = 1) -> Findings:
    """Check Cuntz-Krieger relations for a family of exact rational matrices.

    ``family`` maps every vertex and edge id to a square matrix.  Adjoints are
    transposes.  For directed graphs the relations are named ``CK(i)`` and
    ``CK(ii)``; for k-graphs ``CK1``-``CK4``, with ``CK3`` tested on edge pairs
    and ``CK4`` over finite exhaustive sets of morphisms of degree at most
    ``degree_bound`` in each coordinate.  Every violation carries a residual.
    """
    rep = Findings()
    lam = graph if isinstance(graph, KGraph) else graph_as_kgraph(graph)
    directed = not isinstance(graph, KGraph)
    mats = {k: _mat(v) for k, v in family.items()}
    dims = {len(m) for m in mats.values()} | {len(r) for m in mats.values() for r in m}
    if len(dims) > 1:
        raise ValueError("matrices must be square with a shared dimension")
    n = dims.pop() if dims else 0
    verts = list(lam.vertices)
    edges = sorted({e for v in verts for e in lam.edges_into(v)})
    missing = [g for g in verts + edges if g not in mats]
    if missing:
        raise ValueError(f"family lacks matrices for {missing}")
    name1 = "CK(i)" if directed else "CK3"
    name2 = "CK(ii)" if directed else "CK4"
    # vertex projections
    for v in verts:
        p = mats[v]
        if _mul(p, p) != p or _T(p) != p:
            rep.add("CK1" if not directed else "projection", generator=v, residual=_residual(_sub(_mul(p, p), p)))
    for v, w in itertools.combinations(verts, 2):
        if _mul(mats[v], mats[w]) != _zero(n):
            rep.add("CK1" if not directed else "projection", generator=[v, w], residual=_residual(_mul(mats[v], mats[w])))
    # compatibility with range and source, and the square relations
    for e in edges:
        t = mats[e]
        if _mul(mats[lam.r(e)], _mul(t, mats[lam.s(e)])) != t:
            rep.add("CK2" if not directed else "endpoints", generator=e, residual=_residual(_sub(_mul(mats[lam.r(e)], _mul(t, mats[lam.s(e)])), t)))
        lhs = _mul(_T(t), t)
        if lhs != mats[lam.s(e)]:
            rep.add(name1, generator=e, residual=_residual(_sub(lhs, mats[lam.s(e)])))
    if not directed:
        for (a, b), (c, d) in lam.square_list:
            if _mul(mats[a], mats[b]) != _mul(mats[c], mats[d]):
                rep.add("CK2", generator=[a, b, c, d], residual=_residual(_sub(_mul(mats[a], mats[b]), _mul(mats[c], mats[d]))))

    def t_of(mu: FinitePath):
        if not mu.edges:
            return mats[mu.at]
        out = mats[mu.edges[0]]
        for e in mu.edges[1:]:
            out = _mul(out, mats[e])
        return out

    if not directed:
        # CK3 on pairs of edges with a common range
        for v in verts:
            es = lam.edges_into(v)
            for a, b in itertools.combinations(es, 2):
                mu, nu = FinitePath((a,), graph=lam), FinitePath((b,), graph=lam)
                rhs = _zero(n)
                for al, be in lam.lambda_min(mu, nu):
                    rhs = _addm(rhs, _mul(t_of(al), _T(t_of(be))))
                lhs = _mul(_T(t_of(mu)), t_of(nu))
                if lhs != rhs:
                    rep.add("CK3", generator=[a, b], residual=_residual(_sub(lhs, rhs)))
    # CK4: finite exhaustive sets (for 1-graphs: the set of edges at a non-source)
    for v in verts:
        for D in _exhaustive_sets(lam, v, degree_bound, directed):
            prod = mats[v]
            for mu in D:
                tm = t_of(mu)
                prod = _mul(prod, _sub(mats[v], _mul(tm, _T(tm))))
            if prod != _zero(n):
                rep.add(name2, generator=v, D=[str(m) for m in D], residual=_residual(prod))
    return rep


def _exhaustive_sets(lam: KGraph, v: str, bound: int, directed: bool) -> list[list[FinitePath]]:
    # depends only on the graph, so mutation runs over one graph share it
    cache = lam.__dict__.setdefault("_exhaustive_cache", {})
    key = (v, bound, directed)
    if key not in cache:
        cache[key] = _find_exhaustive_sets(lam, v, bound, directed)
    return cache[key]


def _find_exhaustive_sets(lam: KGraph, v: str, bound: int, directed: bool) -> list[list[FinitePath]]:
    if directed:
        es = lam.edges_into(v)
        return [[FinitePath((e,), graph=lam) for e in es]] if es else []
    cands = [m for m in lam.morphisms_below(v, (bound,) * lam.k) if m.edges]
    out = []
    for size in range(1, min(len(cands), 4) + 1):
        for D in itertools.combinations(cands, size):
            if lam.finite and lam.acyclic:
                if is_exhaustive(lam, v, D).value == "Yes":
                    out.append(list(D))
            elif all(m.edges for m in D) and _edges_cover(lam, v, D):
                out.append(list(D))
    return out


def _edges_cover(lam: KGraph, v: str, D) -> bool:
    # D = v Lambda^{e_i} is exhaustive whenever it is nonempty and lam is locally convex
    degs = {lam.degree(m) for m in D}
    if len(degs) != 1 or sum(next(iter(degs))) != 1:
        return False
    i = next(iter(degs)).index(1)
    return {m.edges for m in D} == {(e,) for e in lam.edges_into(v, i + 1)} and locally_convex(lam)


def boundary_representation(lam: KGraph) -> dict[str, tuple]:
    """The Cuntz-Krieger family on functions on the finite boundary path space.

    ``t_lambda`` sends the basis vector of ``x`` to that of ``lambda x``.
    Needs a finite acyclic k-graph.
    """
    bps = boundary_paths_finite(lam)
    index = {_key(x): i for i, x in enumerate(bps)}
    n = len(bps)
    fam = {}
    for v in lam.vertices:
        m = [[0] * n for _ in range(n)]
        for x in bps:
            if x.r(lam) == v:
                m[index[_key(x)]][index[_key(x)]] = 1
        fam[v] = m
    for v in lam.vertices:
        for e in lam.edges_into(v):
            m = [[0] * n for _ in range(n)]
            for x in bps:
                if x.r(lam) == lam.s(e):
                    y = lam.morph((e,) + x.edges, v)
                    m[index[_key(y)]][index[_key(x)]] = 1
            fam[e] = m
    return fam


def product_path(lam: KGraph, e: DirectedGraph, f: DirectedGraph, x1, x2) -> KPath:
    """The path of ``product_kgraph(e, f)`` whose coordinates are ``x1`` in ``e`` and ``x2`` in ``f``.

    Each coordinate is a finite path or a ``head cycle^infinity`` path (any
    object with ``head`` and ``cycle``).
    """

    def parts(x, g):
        if isinstance(x, FinitePath):
            return x.edges, (), (x.r(g) if x.edges else x.at)
        return tuple(x.head), tuple(x.cycle), g.r((tuple(x.head) + tuple(x.cycle))[0])

    h1, c1, r1 = parts(x1, e)
    h2, c2, r2 = parts(x2, f)
    m1 = e.s(h1[-1]) if h1 else r1
    m2 = f.s(h2[-1]) if h2 else r2
    prefix = [f"{a}|{r2}" for a in h1] + [f"{m1}|{b}" for b in h2]
    tail = [f"{a}|{m2}" for a in c1] + [f"{m1}|{b}" for b in c2]
    pre = lam.morph(prefix, f"{r1}|{r2}")
    if not tail:
        return pre
    return KInf(pre, lam.morph(tail, f"{m1}|{m2}"), 0, graph=lam)


def parse_kpath(text: str, lam: KGraph) -> KPath:
    """Parse ``"@v"``, ``"e1 e2"``, ``"prefix ; tail"`` or ``"prefix ; tail ; T<t>"``.

    A prefix may be written ``@v`` when it is a vertex.
    """
    parts = [p.strip() for p in text.split(";")]
    if len(parts) > 3 or not parts[0] and len(parts) == 1:
        raise ValueError(f"cannot parse path {text!r}")

    def finite(s: str, at: str | None = None) -> FinitePath:
        toks = s.split()
        if len(toks) == 1 and toks[0].startswith("@"):
            return lam.vertex(toks[0][1:])
        if not toks:
            if at is None:
                raise ValueError(f"empty path in {text!r}")
            return lam.vertex(at)
        for a, b in zip(toks, toks[1:]):
            if lam.s(a) != lam.r(b):
                raise ValueError(f"edges {a} and {b} do not compose")
        return lam.morph(toks)

    if len(parts) == 1:
        return finite(parts[0])
    tail = finite(parts[1])
    prefix = finite(parts[0], at=tail.r(lam))
    shift = 0
    if len(parts) == 3:
        if not parts[2].startswith("T"):
            raise ValueError(f"translation must be written T<t>, got {parts[2]!r}")
        shift = int(parts[2][1:])
    x = KInf(prefix, tail, shift, graph=lam)
    x.check(lam)
    return x
