"""Finite and infinite paths in directed graphs, shifts, and shift equivalence.

Infinite paths come in two finitely describable shapes:

* ``UP(head, cycle)``: the ultimately periodic path ``head cycle cycle ...``;
* ``TailAnchored(head, port, kind)``: ``head`` followed by the unique
  continuation along a rail (``kind="rail"``) or a hair (``kind="hair"``) of a
  column-template graph.

Lag convention: ``x ~_n y`` when ``x_i = y_{i-n}`` for all large ``i``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Union

from .digraph import ColumnTemplate, DirectedGraph, hname, reachable, vname
from .verdict import Verdict, no, unknown, yes


@dataclass(frozen=True)
class FinitePath:
    edges: tuple[str, ...] = ()
    at: str | None = None
    graph: object = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.edges:
            object.__setattr__(self, "at", None)
        elif self.at is None:
            raise ValueError("an empty path needs its vertex")

    def __len__(self) -> int:
        return len(self.edges)

    def r(self, graph=None) -> str:
        g = graph or self.graph
        return g.r(self.edges[0]) if self.edges else self.at

    def s(self, graph=None) -> str:
        g = graph or self.graph
        return g.s(self.edges[-1]) if self.edges else self.at

    def check(self, graph) -> None:
        for a, b in zip(self.edges, self.edges[1:]):
            if graph.s(a) != graph.r(b):
                raise ValueError(f"edges {a} and {b} do not compose")

    def concat(self, other: "FinitePath") -> "FinitePath":
        if not self.edges:
            return other
        if not other.edges:
            return self
        return FinitePath(self.edges + other.edges, graph=self.graph or other.graph)

    def edge_set(self) -> set[str]:
        return set(self.edges)

    def __str__(self) -> str:
        return " ".join(self.edges) if self.edges else f"@{self.at}"

    def to_dict(self) -> str:
        return str(self)


def _primitive(cycle: tuple[str, ...]) -> tuple[str, ...]:
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle == cycle[:d] * (n // d):
            return cycle[:d]
    return cycle


def _least_rotation(cycle: tuple[str, ...]) -> int:
    return min(range(len(cycle)), key=lambda i: cycle[i:] + cycle[:i])


@dataclass(frozen=True)
class UP:
    """``head cycle^infinity`` stored in normal form.

    Normal form: the cycle is primitive and in its least rotation, and the head
    is the shortest possible prefix for that rotation.
    """

    head: tuple[str, ...]
    cycle: tuple[str, ...]
    graph: object = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        head, cyc = tuple(self.head), _primitive(tuple(self.cycle))
        if not cyc:
            raise ValueError("UP path needs a nonempty cycle")
        while head and head[-1] == cyc[-1]:
            head, cyc = head[:-1], cyc[-1:] + cyc[:-1]
        j = _least_rotation(cyc)
        head, cyc = head + cyc[:j], cyc[j:] + cyc[:j]
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "cycle", cyc)

    def edge_at(self, i: int) -> str:
        """``x_i`` for ``i >= 1``."""
        if i <= len(self.head):
            return self.head[i - 1]
        return self.cycle[(i - len(self.head) - 1) % len(self.cycle)]

    def prefix(self, n: int) -> tuple[str, ...]:
        return tuple(self.edge_at(i) for i in range(1, n + 1))

    def r(self, graph=None) -> str:
        return (graph or self.graph).r(self.edge_at(1))

    def check(self, graph) -> None:
        FinitePath(self.prefix(len(self.head) + 2 * len(self.cycle)), graph=graph).check(graph)

    def edge_set(self) -> set[str]:
        return set(self.head) | set(self.cycle)

    def __str__(self) -> str:
        return f"{' '.join(self.head)} ; {' '.join(self.cycle)}".strip()

    def to_dict(self) -> str:
        return str(self)


@dataclass(frozen=True)
class TailAnchored:
    """``head`` followed by the rail or hair continuation from ``port``.

    The port of a rail tail is a track vertex ``t_c``; the port of a hair tail
    is a vertex ``t_c.hj`` (``j = 0`` names the attaching track vertex).
    """

    head: tuple[str, ...]
    port: str
    kind: str
    graph: ColumnTemplate = field(compare=False, repr=False, hash=False, default=None)

    def __post_init__(self) -> None:
        if self.kind not in ("rail", "hair"):
            raise ValueError(f"unknown tail kind {self.kind!r}")
        head, port = tuple(self.head), self.port
        g = self.graph
        if g is not None:
            while head:
                prev = self._pred(g, port)
                if prev is None or prev[0] != head[-1]:
                    break
                head, port = head[:-1], prev[1]
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "port", port)

    def _pred(self, g: ColumnTemplate, port: str) -> tuple[str, str] | None:
        """The line edge ending at ``port`` and its range, if any."""
        t, c, d = g.parse_vertex(port)
        if self.kind == "hair":
            if d == 0:
                return None
            return f"{vname(t, c)}.e{d}", hname(t, c, d - 1)
        rail = g.rails.get(t)
        if rail is None:
            return None
        i = c - 1 - rail.r_offset
        if not g.valid_index(rail, i):
            return None
        return f"{rail.id}_{i}", vname(t, c - 1)

    @property
    def line(self) -> tuple:
        t, c, _ = ColumnTemplate.parse_vertex(self.port)
        return ("rail", t) if self.kind == "rail" else ("hair", t, c)

    @property
    def position(self) -> int:
        t, c, d = ColumnTemplate.parse_vertex(self.port)
        return c if self.kind == "rail" else d

    def tail_edge(self, k: int) -> str:
        """The ``k``-th edge (``k >= 1``) of the continuation from the port."""
        t, c, d = ColumnTemplate.parse_vertex(self.port)
        if self.kind == "hair":
            return f"{vname(t, c)}.e{d + k}"
        rail = self.graph.rails[t]
        return f"{rail.id}_{c + k - 1 - rail.r_offset}"

    def edge_at(self, i: int) -> str:
        if i <= len(self.head):
            return self.head[i - 1]
        return self.tail_edge(i - len(self.head))

    def prefix(self, n: int) -> tuple[str, ...]:
        return tuple(self.edge_at(i) for i in range(1, n + 1))

    def vertex_at(self, k: int) -> str:
        """Vertex reached after ``k`` tail edges."""
        t, c, d = ColumnTemplate.parse_vertex(self.port)
        return hname(t, c, d + k) if self.kind == "hair" else vname(t, c + k)

    def r(self, graph=None) -> str:
        return (graph or self.graph).r(self.edge_at(1))

    def check(self, graph) -> None:
        if self.kind == "rail" and ColumnTemplate.parse_vertex(self.port)[0] not in graph.rails:
            raise ValueError(f"{self.port} is not on a rail")
        if self.kind == "hair":
            t, c, _ = graph.parse_vertex(self.port)
            if not graph.has_hair(t, c):
                raise ValueError(f"{self.port} carries no hair")
        FinitePath(self.prefix(len(self.head) + 2), graph=graph).check(graph)
        if self.head and graph.s(self.head[-1]) != self.port:
            raise ValueError("head does not end at the port")

    def edge_set(self) -> set[str]:
        # only the head is finite; callers needing tail edges use tail_edge
        return set(self.head)

    def __str__(self) -> str:
        return f"{' '.join(self.head)} ; @{self.port}:{self.kind}".strip()

    def to_dict(self) -> str:
        return str(self)


InfinitePath = Union[UP, TailAnchored]
Path = Union[FinitePath, UP, TailAnchored]


# ---------------------------------------------------------------------------
# lag sets


@dataclass(frozen=True)
class LagSet:
    """``{}`` , a singleton ``{offset}`` (``modulus == 0``) or ``offset + modulus Z``."""

    empty: bool = True
    offset: int = 0
    modulus: int = 0

    def __post_init__(self) -> None:
        if self.modulus < 0:
            raise ValueError("modulus must be nonnegative")
        if self.modulus:
            object.__setattr__(self, "offset", self.offset % self.modulus)

    @staticmethod
    def none() -> "LagSet":
        return LagSet()

    @staticmethod
    def single(n: int) -> "LagSet":
        return LagSet(False, n, 0)

    @staticmethod
    def progression(a: int, p: int) -> "LagSet":
        return LagSet(False, a, p)

    def __bool__(self) -> bool:
        return not self.empty

    def __contains__(self, n: int) -> bool:
        if self.empty:
            return False
        if self.modulus == 0:
            return n == self.offset
        return (n - self.offset) % self.modulus == 0

    def __neg__(self) -> "LagSet":
        return self if self.empty else LagSet(False, -self.offset, self.modulus)

    def __add__(self, other: "LagSet") -> "LagSet":
        if self.empty or other.empty:
            return LagSet()
        return LagSet(False, self.offset + other.offset, math.gcd(self.modulus, other.modulus))

    def some(self) -> int | None:
        return None if self.empty else self.offset

    def to_dict(self) -> dict:
        if self.empty:
            return {"lags": []}
        if self.modulus == 0:
            return {"lags": [self.offset]}
        return {"offset": self.offset, "modulus": self.modulus}

    def __str__(self) -> str:
        if self.empty:
            return "{}"
        return f"{{{self.offset}}}" if self.modulus == 0 else f"{self.offset} + {self.modulus}Z"


# ---------------------------------------------------------------------------
# operations


def length(x: Path) -> float:
    return len(x.edges) if isinstance(x, FinitePath) else math.inf


def segment(x: Path, m: int, n: int, graph=None) -> FinitePath:
    """``x(m, n) = x_{m+1} ... x_n``; ``x(m, m)`` is the vertex ``x(m)``."""
    if not 0 <= m <= n or n > length(x):
        raise IndexError(f"segment ({m}, {n}) out of range")
    g = graph or x.graph
    if isinstance(x, FinitePath):
        es = x.edges[m:n]
        if es:
            return FinitePath(es, graph=g)
        at = x.at if not x.edges else (g.r(x.edges[m]) if m < len(x.edges) else g.s(x.edges[-1]))
        return FinitePath((), at, graph=g)
    es = tuple(x.edge_at(i) for i in range(m + 1, n + 1))
    if es:
        return FinitePath(es, graph=g)
    return FinitePath((), g.r(x.edge_at(m + 1)), graph=g)


def vertex_at(x: Path, n: int, graph=None) -> str:
    return segment(x, n, n, graph).at


def shift(x: Path, n: int, graph=None) -> Path:
    """``sigma^n(x)``, in normal form."""
    if n < 0:
        raise ValueError("shift needs n >= 0")
    g = graph or x.graph
    if isinstance(x, FinitePath):
        return segment(x, n, len(x), g)
    if isinstance(x, UP):
        if n <= len(x.head):
            return UP(x.head[n:], x.cycle, graph=g)
        k = (n - len(x.head)) % len(x.cycle)
        return UP((), x.cycle[k:] + x.cycle[:k], graph=g)
    if n <= len(x.head):
        return TailAnchored(x.head[n:], x.port, x.kind, graph=g)
    return TailAnchored((), x.vertex_at(n - len(x.head)), x.kind, graph=g)


def shift_equivalent(x: Path, y: Path, graph=None) -> LagSet:
    """The lag set ``{n : x ~_n y}``.

    Finite boundary paths are equivalent exactly when they share their source,
    with lag ``|x| - |y|``.
    """
    g = graph or x.graph or y.graph
    if isinstance(x, FinitePath) or isinstance(y, FinitePath):
        if isinstance(x, FinitePath) and isinstance(y, FinitePath) and x.s(g) == y.s(g):
            return LagSet.single(len(x) - len(y))
        return LagSet.none()
    if isinstance(x, UP) and isinstance(y, UP):
        if x.cycle != y.cycle:
            return LagSet.none()
        return LagSet.progression(len(x.head) - len(y.head), len(x.cycle))
    if isinstance(x, TailAnchored) and isinstance(y, TailAnchored):
        if x.line != y.line:
            return LagSet.none()
        return LagSet.single(len(x.head) - len(y.head) + y.position - x.position)
    return LagSet.none()


def boundary_member(graph, x: Path) -> bool:
    """Membership in ``E^{<=infinity}``: infinite, or finite ending at a source."""
    x.check(graph)
    if isinstance(x, FinitePath):
        return not graph.edges_into(x.s(graph))
    return True


def _class_targets(graph, y: Path) -> tuple[set[str], str | None]:
    """Vertices from which ``[y]`` is entered, plus an optional rail track."""
    if isinstance(y, FinitePath):
        return {y.s(graph)}, None
    if isinstance(y, UP):
        return {graph.r(e) for e in y.cycle}, None
    if y.kind == "hair":
        t, c, _ = graph.parse_vertex(y.port)
        return {vname(t, c)}, None
    return set(), y.line[1]


def reaches_class(graph, w: str, y: Path, budget: int | None = None) -> Verdict:
    """Whether ``w E^{<=infinity}`` meets the shift-equivalence class of ``y``."""
    targets, track = _class_targets(graph, y)
    if isinstance(graph, DirectedGraph):
        return yes() if reachable(graph, [w]) & targets else no({"vertex": w})
    if ".h" in w:
        # a hair vertex only sees the rest of its own hair
        if isinstance(y, TailAnchored) and y.kind == "hair":
            same = graph.parse_vertex(w)[:2] == graph.parse_vertex(y.port)[:2]
            return yes() if same else no({"vertex": w})
        return no({"vertex": w})
    monotone = not any(t.drift < 0 for t in graph.templates) and all(
        graph.col(e.s) >= graph.col(e.r) for e in graph.sporadic
    )
    if track is None:
        bound = max(graph.col(v) for v in targets)
        reach = reachable(graph, [w], max_col=bound, hairs=False)
        if reach & targets:
            return yes()
        return no({"vertex": w}) if monotone else unknown("non-monotone columns", bound)
    window = graph.base(w) + graph.slack + (len(graph.tracks) + 1) * graph.max_drift + 2 * graph.period
    if budget is not None and budget < window:
        window = budget
    reach = reachable(graph, [w], max_col=window, hairs=False)
    if any(graph.parse_vertex(v)[0] == track for v in reach):
        return yes()
    if graph.regular and (budget is None or budget >= window):
        return no({"vertex": w, "window": window})
    return unknown("structure outside the exact class" if not graph.regular else "budget", window)


def _vertices_along(graph, x: Path) -> list[tuple[int, str]]:
    """``(n, x(n))`` for a set of indices covering every distinct situation along ``x``."""
    if isinstance(x, FinitePath):
        return [(n, vertex_at(x, n, graph)) for n in range(len(x) + 1)]
    if isinstance(x, UP):
        return [(n, graph.r(x.edge_at(n + 1))) for n in range(len(x.head) + len(x.cycle))]
    h = len(x.head)
    out = [(n, graph.r(x.edge_at(n + 1))) for n in range(h)]
    if x.kind == "hair":
        # hair vertices all behave alike
        return out + [(h, x.port), (h + 1, x.vertex_at(1))]
    c = graph.col(x.port)
    last = max(c, graph.c0) + graph.period
    return out + [(h + k, x.vertex_at(k)) for k in range(last - c + 1)]


def frequently_divertable(graph, x: Path, y: Path, budget: int | None = None) -> Verdict:
    """Whether every ``x(n)`` reaches a path shift equivalent to ``y``.

    No carries the index ``n`` and the vertex ``x(n)``.  On column templates
    the vertices of a rail tail repeat up to translation once the column is at
    least ``c0``, so one period beyond that is checked.
    """
    pending = None
    for n, w in _vertices_along(graph, x):
        v = reaches_class(graph, w, y, budget)
        if v.value == "No":
            return no({"n": n, "vertex": w})
        if not v.decided:
            pending = v
    if pending is not None:
        return pending
    return yes()


# ---------------------------------------------------------------------------
# literals


def parse_path(text: str, graph) -> Path:
    """Parse ``"e1 e2"``, ``"@v"``, ``"e1 e2 ; c1 c2"`` or ``"e1 ; @port[:kind]"``."""
    head_txt, sep, tail_txt = text.partition(";")
    head = tuple(head_txt.split())
    if not sep:
        if len(head) == 1 and head[0].startswith("@"):
            p = FinitePath((), head[0][1:], graph=graph)
        else:
            p = FinitePath(head, graph=graph)
        p.check(graph)
        return p
    tail = tail_txt.strip()
    if tail.startswith("@"):
        port, _, kind = tail[1:].partition(":")
        if not kind:
            if not isinstance(graph, ColumnTemplate):
                raise ValueError("tail-anchored paths need a column-template graph")
            t, c, d = graph.parse_vertex(port)
            kind = "rail" if d == 0 and t in graph.rails else "hair"
        p = TailAnchored(head, port, kind, graph=graph)
    else:
        p = UP(head, tuple(tail.split()), graph=graph)
    p.check(graph)
    return p


def brute_lags(x: Path, y: Path, depth: int, span: int) -> set[int]:
    """Lags ``|n| <= span`` with ``x_i = y_{i-n}`` for ``depth/2 < i <= depth``.

    Reference implementation used to cross-check ``shift_equivalent``.
    """
    out = set()
    for n in range(-span, span + 1):
        lo = max(depth // 2, n) + 1
        if all(x.edge_at(i) == y.edge_at(i - n) for i in range(lo, depth + 1) if i - n >= 1):
            out.add(n)
    return out


def enumerate_up(graph: DirectedGraph, start: str, max_head: int) -> list[UP]:
    """All UP paths with range ``start``, a simple cycle and a head of length ``<= max_head``."""
    from .digraph import find_cycles

    cycles = [c.edges for c in find_cycles(graph)]
    by_vertex: dict[str, list[tuple[str, ...]]] = {}
    for c in cycles:
        for i in range(len(c)):
            rot = c[i:] + c[:i]
            by_vertex.setdefault(graph.r(rot[0]), []).append(rot)
    out = set()
    todo = deque([((), start)])
    while todo:
        head, v = todo.popleft()
        for c in by_vertex.get(v, ()):
            out.add(UP(head, c, graph=graph))
        if len(head) < max_head:
            for e in graph.edges_into(v):
                todo.append((head + (e,), graph.s(e)))
    return sorted(out, key=str)
