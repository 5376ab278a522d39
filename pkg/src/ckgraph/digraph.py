"""Row-finite directed graphs: finite graphs and column-template (staged) graphs.

Edges are stored as ``(id, r, s)``.  A path ``e1 e2 ... en`` is composable when
``s(e_j) == r(e_{j+1})``, so paths are read from their range towards their
source.  This is the reverse of the "follow the arrow" reading: an edge drawn
as an arrow points from its source to its range.
"""
from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Iterator, Protocol

import networkx as nx

from .verdict import Findings, Verdict, no, unknown, yes


@dataclass(frozen=True, order=True)
class Edge:
    id: str
    r: str
    s: str

    def to_dict(self) -> dict:
        return {"id": self.id, "r": self.r, "s": self.s}


class DirectedGraph:
    """A finite directed graph.

    The constructor keeps the raw vertex and edge lists so that ``validate``
    can report duplicates and dangling endpoints instead of raising.
    """

    kind = "finite"

    def __init__(self, vertices: Iterable[str] = (), edges: Iterable[Edge | tuple] = ()):
        self.vertex_list = [str(v) for v in vertices]
        self.edge_list = [e if isinstance(e, Edge) else Edge(*map(str, e)) for e in edges]
        self.vertices = frozenset(self.vertex_list)
        self._edges = {e.id: e for e in self.edge_list}
        self._into: dict[str, list[str]] = defaultdict(list)
        self._from: dict[str, list[str]] = defaultdict(list)
        for e in self._edges.values():
            self._into[e.r].append(e.id)
            self._from[e.s].append(e.id)

    @classmethod
    def from_dict(cls, doc: dict) -> "DirectedGraph":
        edges = []
        for i, e in enumerate(doc.get("edges", [])):
            try:
                edges.append(Edge(str(e["id"]), str(e["r"]), str(e["s"])))
            except KeyError as exc:
                raise ValueError(f"edges[{i}]: missing field {exc.args[0]!r}") from None
        return cls(doc.get("vertices", []), edges)

    def to_dict(self) -> dict:
        return {
            "vertices": sorted(self.vertices),
            "edges": [e.to_dict() for e in sorted(self._edges.values())],
        }

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DirectedGraph) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash((self.vertices, frozenset(self._edges.values())))

    def __repr__(self) -> str:
        return f"DirectedGraph({len(self.vertices)} vertices, {len(self._edges)} edges)"

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self._edges.values())

    @property
    def edge_ids(self) -> frozenset[str]:
        return frozenset(self._edges)

    def edge(self, eid: str) -> Edge:
        return self._edges[eid]

    def r(self, eid: str) -> str:
        return self._edges[eid].r

    def s(self, eid: str) -> str:
        return self._edges[eid].s

    def edges_into(self, v: str) -> tuple[str, ...]:
        """The edges with range ``v``, i.e. ``r^{-1}(v)``."""
        return tuple(sorted(self._into.get(v, ())))

    def edges_from(self, v: str) -> tuple[str, ...]:
        """The edges with source ``v``."""
        return tuple(sorted(self._from.get(v, ())))

    def col(self, v: str) -> int:
        return 0

    def nx_graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.vertices)
        for e in self._edges.values():
            g.add_edge(e.r, e.s, key=e.id)
        return g


# ---------------------------------------------------------------------------
# column templates


@dataclass(frozen=True)
class Template:
    """Edge family ``id_i`` with ``r = (r_track, i + r_offset)``, ``s = (s_track, i + s_offset)``.

    Instances exist for ``i >= origin`` with ``i = phase (mod period)``.
    """

    id: str
    r_track: str
    r_offset: int
    s_track: str
    s_offset: int
    period: int = 1
    phase: int = 0
    color: int = 1

    @property
    def drift(self) -> int:
        return self.s_offset - self.r_offset

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "r": {"track": self.r_track, "offset": self.r_offset},
            "s": {"track": self.s_track, "offset": self.s_offset},
        }
        if self.period != 1 or self.phase:
            out["period"], out["phase"] = self.period, self.phase
        if self.color != 1:
            out["color"] = self.color
        return out


@dataclass(frozen=True)
class Hair:
    """An infinite chain ``(t, c) <- h1 <- h2 <- ...`` at every column ``c = phase (mod period)``."""

    attach_track: str
    period: int = 1
    phase: int = 0

    def to_dict(self) -> dict:
        out: dict = {"attach_track": self.attach_track, "chain": True}
        if self.period != 1 or self.phase:
            out["period"], out["phase"] = self.period, self.phase
        return out


class StageProvider(Protocol):
    def stage(self, n: int) -> DirectedGraph: ...

    def frontier(self, n: int) -> frozenset[str]: ...


class StagedFamily:
    """A stage provider given by two callables; used for ad hoc infinite families."""

    kind = "staged"

    def __init__(self, stage_fn, frontier_fn, name: str | None = None):
        self._stage = stage_fn
        self._frontier = frontier_fn
        self.name = name

    def stage(self, n: int) -> DirectedGraph:
        return self._stage(n)

    def frontier(self, n: int) -> frozenset[str]:
        return frozenset(self._frontier(n))


def vname(track: str, col: int) -> str:
    return f"{track}_{col}"


def hname(track: str, col: int, depth: int) -> str:
    return f"{track}_{col}.h{depth}" if depth else vname(track, col)


class ColumnTemplate:
    """A row-finite infinite graph given by finitely many column templates.

    Track vertices are named ``t_c`` (``c >= origin``), template edges ``tpl_i``,
    hair vertices ``t_c.hj`` and hair edges ``t_c.ej`` (``r = t_c.h(j-1)``,
    ``s = t_c.hj``).  Every local query (in-edges, out-edges, endpoints) is
    answered exactly, so stages never need to be guessed.
    """

    kind = "staged"

    def __init__(
        self,
        tracks: Iterable[str],
        templates: Iterable[Template],
        hairs: Iterable[Hair] = (),
        sporadic: Iterable[Edge] = (),
        origin: int = 0,
        name: str | None = None,
    ):
        self.tracks = tuple(tracks)
        self.templates = tuple(templates)
        self.hairs = tuple(hairs)
        self.sporadic = tuple(sporadic)
        self.origin = origin
        self.name = name
        self._tpl = {t.id: t for t in self.templates}
        self._hair_by_track: dict[str, list[Hair]] = defaultdict(list)
        for h in self.hairs:
            self._hair_by_track[h.attach_track].append(h)
        self._sp = {e.id: e for e in self.sporadic}
        self._sp_into: dict[str, list[str]] = defaultdict(list)
        self._sp_from: dict[str, list[str]] = defaultdict(list)
        for e in self.sporadic:
            self._sp_into[e.r].append(e.id)
            self._sp_from[e.s].append(e.id)

    # -- documents -------------------------------------------------------
    @classmethod
    def from_dict(cls, doc: dict) -> "ColumnTemplate":
        try:
            tracks = [str(t["id"]) if isinstance(t, dict) else str(t) for t in doc["tracks"]]
        except KeyError:
            raise ValueError("column template: missing field 'tracks'") from None
        templates = []
        for i, t in enumerate(doc.get("templates", [])):
            try:
                templates.append(
                    Template(
                        str(t["id"]),
                        str(t["r"]["track"]),
                        int(t["r"].get("offset", 0)),
                        str(t["s"]["track"]),
                        int(t["s"].get("offset", 0)),
                        int(t.get("period", 1)),
                        int(t.get("phase", 0)),
                        int(t.get("color", 1)),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise ValueError(f"templates[{i}]: malformed ({exc})") from None
        hairs = [
            Hair(str(h["attach_track"]), int(h.get("period", 1)), int(h.get("phase", 0)))
            for h in doc.get("hairs", [])
        ]
        sp = doc.get("sporadic") or {}
        sporadic = [Edge(str(e["id"]), str(e["r"]), str(e["s"])) for e in sp.get("edges", [])]
        return cls(tracks, templates, hairs, sporadic, int(doc.get("origin", 0)), doc.get("name"))

    def to_dict(self) -> dict:
        out: dict = {
            "tracks": [{"id": t} for t in self.tracks],
            "templates": [t.to_dict() for t in self.templates],
            "hairs": [h.to_dict() for h in self.hairs],
        }
        if self.sporadic:
            out["sporadic"] = {"edges": [e.to_dict() for e in self.sporadic]}
        if self.origin:
            out["origin"] = self.origin
        if self.name:
            out["name"] = self.name
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ColumnTemplate) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(repr(self.to_dict()))

    def __repr__(self) -> str:
        return f"ColumnTemplate({self.name or ''}: {len(self.tracks)} tracks, {len(self.templates)} templates)"

    # -- names -------------------------------------------------------------
    @staticmethod
    def parse_vertex(v: str) -> tuple[str, int, int]:
        """``(track, column, hair depth)``; depth 0 for track vertices."""
        base, _, depth = v.partition(".h")
        track, _, col = base.rpartition("_")
        return track, int(col), int(depth) if depth else 0

    def col(self, v: str) -> int:
        return self.parse_vertex(v)[1]

    def has_vertex(self, v: str) -> bool:
        try:
            t, c, d = self.parse_vertex(v)
        except ValueError:
            return False
        if t not in self.tracks or c < self.origin:
            return False
        return d == 0 or self.has_hair(t, c)

    def has_hair(self, track: str, col: int) -> bool:
        return col >= self.origin and any(
            (col - h.phase) % h.period == 0 for h in self._hair_by_track.get(track, ())
        )

    def valid_index(self, tpl: Template, i: int) -> bool:
        return i >= self.origin and (i - tpl.phase) % tpl.period == 0

    def edge(self, eid: str) -> Edge:
        if eid in self._sp:
            return self._sp[eid]
        if ".e" in eid:
            base, _, depth = eid.partition(".e")
            t, c, _ = self.parse_vertex(base)
            j = int(depth)
            return Edge(eid, hname(t, c, j - 1), hname(t, c, j))
        tid, _, i = eid.rpartition("_")
        tpl = self._tpl[tid]
        i = int(i)
        return Edge(eid, vname(tpl.r_track, i + tpl.r_offset), vname(tpl.s_track, i + tpl.s_offset))

    def r(self, eid: str) -> str:
        return self.edge(eid).r

    def s(self, eid: str) -> str:
        return self.edge(eid).s

    def color(self, eid: str) -> int:
        if eid in self._sp or ".e" in eid:
            return 1
        return self._tpl[eid.rpartition("_")[0]].color

    def edges_into(self, v: str) -> tuple[str, ...]:
        t, c, d = self.parse_vertex(v)
        if d:
            return (f"{vname(t, c)}.e{d + 1}",)
        out = []
        for tpl in self.templates:
            if tpl.r_track == t:
                i = c - tpl.r_offset
                if self.valid_index(tpl, i):
                    out.append(f"{tpl.id}_{i}")
        if self.has_hair(t, c):
            out.append(f"{vname(t, c)}.e1")
        out.extend(self._sp_into.get(v, ()))
        return tuple(sorted(out))

    def edges_from(self, v: str) -> tuple[str, ...]:
        t, c, d = self.parse_vertex(v)
        if d:
            return (f"{vname(t, c)}.e{d}",)
        out = []
        for tpl in self.templates:
            if tpl.s_track == t:
                i = c - tpl.s_offset
                if self.valid_index(tpl, i):
                    out.append(f"{tpl.id}_{i}")
        out.extend(self._sp_from.get(v, ()))
        return tuple(sorted(out))

    def translate_vertex(self, v: str, p: int) -> str:
        t, c, d = self.parse_vertex(v)
        return hname(t, c + p, d)

    def translate_edge(self, eid: str, p: int) -> str:
        if ".e" in eid:
            base, _, depth = eid.partition(".e")
            return f"{self.translate_vertex(base, p)}.e{depth}"
        tid, _, i = eid.rpartition("_")
        return f"{tid}_{int(i) + p}"

    # -- stages ------------------------------------------------------------
    def stage(self, n: int) -> DirectedGraph:
        """Track columns ``origin..n`` plus hair chains truncated at depth ``n - c + 1``."""
        verts, edges = [], []
        for t in self.tracks:
            for c in range(self.origin, n + 1):
                verts.append(vname(t, c))
                if self.has_hair(t, c):
                    for j in range(1, n - c + 2):
                        verts.append(hname(t, c, j))
                        edges.append(self.edge(f"{vname(t, c)}.e{j}"))
        vs = set(verts)
        for tpl in self.templates:
            for i in range(self.origin, n + 1):
                if self.valid_index(tpl, i):
                    e = self.edge(f"{tpl.id}_{i}")
                    if e.r in vs and e.s in vs:
                        edges.append(e)
        for e in self.sporadic:
            if e.r in vs and e.s in vs:
                edges.append(e)
        return DirectedGraph(verts, edges)

    def frontier(self, n: int) -> frozenset[str]:
        g = self.stage(n)
        return frozenset(v for v in g.vertices if set(self.edges_into(v)) != set(g.edges_into(v)))

    # -- structure ---------------------------------------------------------
    @cached_property
    def period(self) -> int:
        ps = [t.period for t in self.templates] + [h.period for h in self.hairs]
        return math.lcm(*ps) if ps else 1

    @cached_property
    def rails(self) -> dict[str, Template]:
        out = {}
        for tpl in self.templates:
            if tpl.r_track == tpl.s_track and tpl.drift == 1 and tpl.period == 1 and tpl.r_track not in out:
                out[tpl.r_track] = tpl
        return out

    def is_rail_edge(self, eid: str) -> bool:
        if ".e" in eid or eid in self._sp:
            return False
        tpl = self._tpl[eid.rpartition("_")[0]]
        return self.rails.get(tpl.r_track) is tpl

    @cached_property
    def cross(self) -> tuple[Template, ...]:
        return tuple(t for t in self.templates if t.r_track != t.s_track)

    @cached_property
    def track_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.tracks)
        g.add_edges_from((t.r_track, t.s_track) for t in self.cross)
        return g

    @cached_property
    def irregularities(self) -> tuple[str, ...]:
        """Reasons why the exact (pumping-bound) decision procedures do not apply."""
        out = []
        if any(t.drift < 0 for t in self.templates):
            out.append("an edge template decreases the column")
        if any(min(t.r_offset, t.s_offset) < 0 for t in self.templates):
            out.append("negative template offset")
        same = [t for t in self.templates if t.r_track == t.s_track]
        if any(self.rails.get(t.r_track) is not t for t in same):
            out.append("a same-track template is not a rail (drift 1, period 1)")
        if not self._columns_acyclic():
            out.append("edges inside one column form a cycle")
        if self.sporadic:
            out.append("sporadic edges present")
        return tuple(out)

    def _columns_acyclic(self) -> bool:
        # only drift-0 edges stay in a column; one period past the offsets covers all columns
        hi = self.origin + max([max(t.r_offset, t.s_offset) for t in self.templates] or [0]) + self.period
        for c in range(self.origin, hi + 1):
            dg = nx.DiGraph()
            for tpl in self.templates:
                if tpl.drift == 0 and self.valid_index(tpl, c - tpl.r_offset):
                    dg.add_edge(tpl.r_track, tpl.s_track)
            if not nx.is_directed_acyclic_graph(dg):
                return False
        return True

    @property
    def regular(self) -> bool:
        return not self.irregularities

    @cached_property
    def c0(self) -> int:
        """First column of the translation-invariant region."""
        offs = [max(t.r_offset, t.s_offset) for t in self.templates] or [0]
        return self.origin + max(0, max(offs))

    @cached_property
    def max_drift(self) -> int:
        return max((t.drift for t in self.cross), default=0)

    @cached_property
    def slack(self) -> int:
        """Column slack ``L`` after which reachability is ``period``-periodic."""
        n = len(self.tracks)
        return max(0, n - 1) * self.max_drift + (n + 2) * self.period

    def base(self, v: str) -> int:
        return max(self.col(v), self.c0)

    def representatives(self) -> list[str]:
        """Track vertices covering every translation class (columns ``< c0 + period``)."""
        return [vname(t, c) for c in range(self.origin, self.c0 + self.period) for t in self.tracks]


# ---------------------------------------------------------------------------
# generic queries


AnyGraph = DirectedGraph | ColumnTemplate


def reachable(graph: AnyGraph, starts: Iterable[str], max_col: int | None = None, hairs: bool = True) -> set[str]:
    """Vertices ``w`` with a path from some start vertex ``v`` to ``w`` (``r = v``, ``s = w``)."""
    seen = set(starts)
    todo = deque(seen)
    while todo:
        v = todo.popleft()
        for e in graph.edges_into(v):
            w = graph.s(e)
            if w in seen:
                continue
            if max_col is not None and graph.col(w) > max_col:
                continue
            if not hairs and ".h" in w:
                continue
            seen.add(w)
            todo.append(w)
    return seen


def _stage_of(graph, n: int | None) -> DirectedGraph:
    if isinstance(graph, DirectedGraph):
        return graph
    if n is None:
        raise ValueError("a stage budget is required for infinite graphs")
    return graph.stage(n)


def validate(graph, stages: Iterable[int] = range(0, 6)) -> Findings:
    """Report dangling endpoints, duplicate ids, and (for staged inputs) stage contract violations."""
    rep = Findings()
    if isinstance(graph, DirectedGraph):
        _validate_finite(graph, rep)
        return rep
    if isinstance(graph, ColumnTemplate):
        _validate_template(graph, rep)
        if not rep.valid:
            return rep
    stages = list(stages)
    prev = None
    for n in stages:
        g = graph.stage(n)
        sub = Findings()
        _validate_finite(g, sub)
        for p in sub.problems:
            rep.add(p["kind"], stage=n, **{k: v for k, v in p.items() if k != "kind"})
        fr = graph.frontier(n)
        if not fr <= g.vertices:
            rep.add("frontier_outside_stage", stage=n, vertices=sorted(fr - g.vertices))
        if prev is not None:
            pn, pg, pfr = prev
            if not (pg.vertices <= g.vertices and pg.edges <= g.edges):
                rep.add("not_monotone", stage=n)
            for v in pg.vertices - pfr:
                if set(pg.edges_into(v)) != set(g.edges_into(v)):
                    rep.add("stability_violation", stage=pn, vertex=v)
        prev = (n, g, fr)
    return rep


def _validate_finite(g: DirectedGraph, rep: Findings) -> None:
    seen: set[str] = set()
    for v in g.vertex_list:
        if v in seen:
            rep.add("duplicate_vertex", vertex=v)
        seen.add(v)
    ids: set[str] = set()
    for e in g.edge_list:
        if e.id in ids:
            rep.add("duplicate_edge_id", edge=e.id)
        ids.add(e.id)
        for end in ("r", "s"):
            if getattr(e, end) not in g.vertices:
                rep.add("dangling_endpoint", edge=e.id, end=end, vertex=getattr(e, end))


def _validate_template(g: ColumnTemplate, rep: Findings) -> None:
    if len(set(g.tracks)) != len(g.tracks):
        rep.add("duplicate_track")
    for t in g.tracks:
        if "." in t or not t:
            rep.add("bad_track_id", track=t)
    ids = [t.id for t in g.templates]
    if len(set(ids)) != len(ids):
        rep.add("duplicate_edge_id", edge="template")
    for t in g.templates:
        if t.r_track not in g.tracks or t.s_track not in g.tracks:
            rep.add("dangling_endpoint", edge=t.id)
        if t.period < 1 or "." in t.id:
            rep.add("bad_template", edge=t.id)
    for h in g.hairs:
        if h.attach_track not in g.tracks:
            rep.add("dangling_endpoint", edge=f"hair@{h.attach_track}")
    for e in g.sporadic:
        for end in (e.r, e.s):
            if not g.has_vertex(end):
                rep.add("dangling_endpoint", edge=e.id, vertex=end)


def sources(graph, budget: int | None = None) -> frozenset[str]:
    """Vertices receiving no edges.

    For column templates the answer covers the columns ``<= budget``; for a
    generic stage provider, frontier vertices are left out because their
    in-edges are not yet known.
    """
    if isinstance(graph, DirectedGraph):
        return frozenset(v for v in graph.vertices if not graph.edges_into(v))
    if isinstance(graph, ColumnTemplate):
        budget = graph.c0 + graph.period if budget is None else budget
        return frozenset(
            vname(t, c)
            for t in graph.tracks
            for c in range(graph.origin, budget + 1)
            if not graph.edges_into(vname(t, c))
        )
    g = graph.stage(budget)
    fr = graph.frontier(budget)
    return frozenset(v for v in g.vertices - fr if not g.edges_into(v))


@dataclass(frozen=True)
class Cycle:
    edges: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.edges:
            raise ValueError("a cycle needs at least one edge")

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[str]:
        return iter(self.edges)

    @staticmethod
    def canonical(edges: Iterable[str]) -> "Cycle":
        es = tuple(edges)
        i = es.index(min(es))
        return Cycle(es[i:] + es[:i])

    def vertices(self, graph) -> tuple[str, ...]:
        """``r(alpha_1), ..., r(alpha_k)``."""
        return tuple(graph.r(e) for e in self.edges)

    def is_valid(self, graph) -> bool:
        es = self.edges
        if any(graph.s(es[j]) != graph.r(es[(j + 1) % len(es)]) for j in range(len(es))):
            return False
        srcs = [graph.s(e) for e in es]
        return len(set(srcs)) == len(srcs)

    def to_dict(self) -> list[str]:
        return list(self.edges)


@dataclass
class CycleList:
    cycles: list[Cycle]
    complete: bool = True

    def __iter__(self) -> Iterator[Cycle]:
        return iter(self.cycles)

    def __len__(self) -> int:
        return len(self.cycles)


def find_cycles(graph, budget: int | None = None) -> CycleList:
    """All simple cycles, each rotated to start at its least edge id.

    Uses networkx's simple-cycle enumeration on the underlying vertex graph,
    then expands parallel edges.  On an infinite graph the result covers the
    stage at ``budget`` and is flagged incomplete.
    """
    g = _stage_of(graph, budget)
    dg = nx.DiGraph()
    dg.add_nodes_from(g.vertices)
    par: dict[tuple[str, str], list[str]] = defaultdict(list)
    for e in g.edges:
        dg.add_edge(e.r, e.s)
        par[(e.r, e.s)].append(e.id)
    found = set()
    for vs in nx.simple_cycles(dg):
        hops = [par[(vs[i], vs[(i + 1) % len(vs)])] for i in range(len(vs))]
        for choice in product(*hops):
            found.add(Cycle.canonical(choice))
    cycles = sorted(found, key=lambda c: c.edges)
    return CycleList(cycles, complete=isinstance(graph, DirectedGraph))


def cycle_entries(graph, cycle: Cycle) -> frozenset[str]:
    """Edges ``f`` with ``r(f) = r(alpha_i)`` and ``f != alpha_i``."""
    own = set(cycle.edges)
    return frozenset(f for v in cycle.vertices(graph) for f in graph.edges_into(v) if f not in own)


def _edges_of_paths(graph, paths: Iterable) -> set[str]:
    out: set[str] = set()
    for p in paths:
        out.update(getattr(p, "edge_set", lambda: set(p))())
    return out


def splitting_pairs(graph, restriction=None, budget: int | None = None) -> frozenset[frozenset[str]]:
    """Unordered pairs ``{f, g}`` with ``s(f) = s(g)``, ``f != g``, inside ``E|_S``.

    ``restriction`` is either a set of vertices ``V`` (meaning ``S = V E^{<=inf}``,
    whose edges are exactly those with range reachable from ``V``) or a set of
    paths.  Infinite graphs need ``budget`` (a column bound).
    """
    if restriction is None:
        g = _stage_of(graph, budget)
        allowed = set(g.edge_ids)
    else:
        items = list(restriction)
        if all(isinstance(v, str) for v in items):
            reach = reachable(graph, items, max_col=budget)
            allowed = {e for v in reach for e in graph.edges_into(v)}
            if budget is not None:
                allowed = {e for e in allowed if graph.col(graph.s(e)) <= budget}
        else:
            allowed = _edges_of_paths(graph, items)
    by_src: dict[str, list[str]] = defaultdict(list)
    for e in allowed:
        by_src[graph.s(e)].append(e)
    return frozenset(
        frozenset(pair) for es in by_src.values() for pair in combinations(sorted(es), 2)
    )


def _cyclic_components(g: DirectedGraph) -> list[set[str]]:
    dg = nx.DiGraph()
    dg.add_nodes_from(g.vertices)
    dg.add_edges_from((e.r, e.s) for e in g.edges)
    out = []
    for comp in nx.strongly_connected_components(dg):
        if len(comp) > 1 or any(dg.has_edge(v, v) for v in comp):
            out.append(set(comp))
    return out


def is_cofinal(graph, budget: int | None = None) -> Verdict:
    """Whether every vertex reaches every path in ``E^{<=inf}``.

    On a finite graph this reduces to: every vertex reaches every source and
    every strongly connected component that carries a cycle.  The No
    certificate names the vertex and the unreachable boundary path.
    """
    if isinstance(graph, DirectedGraph):
        targets: list[tuple[set[str], dict]] = []
        for s in sorted(sources(graph)):
            targets.append(({s}, {"kind": "source", "path": s}))
        cyc = find_cycles(graph)
        for comp in _cyclic_components(graph):
            c = next(c for c in cyc if set(c.vertices(graph)) <= comp)
            targets.append((comp, {"kind": "up", "path": f"; {' '.join(c.edges)}"}))
        for v in sorted(graph.vertices):
            reach = reachable(graph, [v])
            for comp, x in targets:
                if not reach & comp:
                    return no({"vertex": v, "x": x["path"], "x_kind": x["kind"]})
        return yes({"targets": len(targets)})
    if isinstance(graph, ColumnTemplate):
        return _cofinal_template(graph, budget)
    return unknown("cofinality of a generic stage provider needs declared ports")


def _cofinal_template(g: ColumnTemplate, budget: int | None) -> Verdict:
    # a hair vertex sees only its own hair, while hairs recur every period
    if g.hairs:
        h = g.hairs[0]
        c = g.origin + ((h.phase - g.origin) % h.period)
        return no(
            {"vertex": hname(h.attach_track, c, 1), "x": f"; @{vname(h.attach_track, c + h.period)}:hair"},
            reason="hair vertices only reach their own hair",
        )
    srcs = sources(g, g.c0 + g.period)
    if srcs:
        s = min(srcs, key=lambda v: (g.col(v), v))
        return no({"vertex": vname(g.tracks[0], g.col(s) + 1), "x": s}, reason="columns never decrease along paths")
    if not g.regular:
        return unknown("structure outside the exact class: " + "; ".join(g.irregularities))
    for v in g.representatives():
        window = g.base(v) + g.slack + g.period
        if budget is not None and window > budget:
            return unknown("budget", budget=budget)
        reach = reachable(g, [v], max_col=window, hairs=False)
        for t in g.rails:
            if not any(g.parse_vertex(w)[0] == t for w in reach):
                return no({"vertex": v, "x": f"; @{v if g.parse_vertex(v)[0] == t else vname(t, g.c0)}:rail", "track": t})
    return yes({"tail_classes": sorted(g.rails)})
