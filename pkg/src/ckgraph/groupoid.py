"""Path groupoids: elements, basis sets, counting measures and k-times convergence.

Counts are exact on column templates in the exact class: paths only move to
larger columns, so the paths from a vertex into a shift-equivalence class
are finitely many unless a landing recurs every period, which is reported as
infinite with the recurring column as certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from .digraph import ColumnTemplate, DirectedGraph, find_cycles, vname
from .kgraph import KGraph, add, kdegree, kequal, kprefix, kshift, kshift_equivalent, sub
from .paths import FinitePath, TailAnchored, UP, length, segment, shift, shift_equivalent
from .verdict import Verdict, jsonable, unknown

INF = math.inf


# -- elements -------------------------------------------------------------------


def _same(graph, a, b) -> bool:
    if isinstance(graph, KGraph):
        return kequal(graph, a, b)
    return a == b


def _lag_ok(graph, x, n, y) -> bool:
    if isinstance(graph, KGraph):
        return kshift_equivalent(graph, x, y, tuple(n)) is not None
    return n in shift_equivalent(x, y, graph)


@dataclass(frozen=True)
class GroupoidElement:
    """``(x, n, y)`` with ``x ~_n y`` (checked on construction)."""

    x: object
    n: object
    y: object
    graph: object = field(compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if isinstance(self.n, list):
            object.__setattr__(self, "n", tuple(self.n))
        if not _lag_ok(self.graph, self.x, self.n, self.y):
            raise ValueError(f"{self.x} and {self.y} are not shift equivalent with lag {self.n}")

    @property
    def r(self) -> "GroupoidElement":
        return GroupoidElement(self.x, self._zero(), self.x, self.graph)

    @property
    def s(self) -> "GroupoidElement":
        return GroupoidElement(self.y, self._zero(), self.y, self.graph)

    def _zero(self):
        return tuple(0 for _ in self.n) if isinstance(self.n, tuple) else 0

    def inverse(self) -> "GroupoidElement":
        neg = tuple(-c for c in self.n) if isinstance(self.n, tuple) else -self.n
        return GroupoidElement(self.y, neg, self.x, self.graph)

    def compose(self, other: "GroupoidElement") -> "GroupoidElement":
        if not _same(self.graph, self.y, other.x):
            raise ValueError("elements are not composable")
        n = add(self.n, other.n) if isinstance(self.n, tuple) else self.n + other.n
        return GroupoidElement(self.x, n, other.y, self.graph)

    def __mul__(self, other: "GroupoidElement") -> "GroupoidElement":
        return self.compose(other)

    def equals(self, other: "GroupoidElement") -> bool:
        return self.n == other.n and _same(self.graph, self.x, other.x) and _same(self.graph, self.y, other.y)

    def to_dict(self) -> dict:
        return {"x": str(self.x), "n": jsonable(self.n), "y": str(self.y)}


def compose(g: GroupoidElement, h: GroupoidElement) -> GroupoidElement:
    return g.compose(h)


def inverse(g: GroupoidElement) -> GroupoidElement:
    return g.inverse()


@dataclass(frozen=True)
class BasisSet:
    """``Z(alpha, beta) = {(alpha w, d(alpha) - d(beta), beta w)}``."""

    alpha: FinitePath
    beta: FinitePath

    def to_dict(self) -> dict:
        return {"alpha": str(self.alpha), "beta": str(self.beta)}


def _starts_with(graph, x, alpha: FinitePath) -> bool:
    if isinstance(graph, KGraph):
        d = graph.degree(alpha)
        try:
            p = kprefix(graph, x, d)
        except IndexError:
            return False
        return p.edges == alpha.edges and p.r(graph) == alpha.r(graph)
    if length(x) < len(alpha):
        return False
    return segment(x, 0, len(alpha), graph) == segment(alpha, 0, len(alpha), graph)


def basis_member(g: GroupoidElement, Z: BasisSet) -> bool:
    """Whether ``g`` lies in ``Z(alpha, beta)``."""
    graph = g.graph
    a, b = Z.alpha, Z.beta
    if isinstance(graph, KGraph):
        da, db = graph.degree(a), graph.degree(b)
        if a.s(graph) != b.s(graph) or tuple(g.n) != sub(da, db):
            return False
        if not (_starts_with(graph, g.x, a) and _starts_with(graph, g.y, b)):
            return False
        return kequal(graph, kshift(graph, g.x, da), kshift(graph, g.y, db))
    if a.s(graph) != b.s(graph) or g.n != len(a) - len(b):
        return False
    if not (_starts_with(graph, g.x, a) and _starts_with(graph, g.y, b)):
        return False
    return shift(g.x, len(a), graph) == shift(g.y, len(b), graph)


# -- counting -------------------------------------------------------------------


class _Counter:
    """Path counts between track vertices of a column template."""

    def __init__(self, g: ColumnTemplate):
        self.g = g
        self.paths = lru_cache(maxsize=None)(self._paths)

    def _paths(self, a: str, b: str) -> int:
        g = self.g
        if a == b:
            return 1
        if g.col(a) > g.col(b):
            return 0
        return sum(self.paths(g.s(e), b) for e in g.edges_into(a) if ".h" not in g.s(e))

    def rail(self, u: str, t: str) -> tuple[float, dict]:
        """Paths from ``u`` that end on the rail along ``t``."""
        g = self.g
        lo = g.col(u)
        late = g.base(u) + g.slack
        total = 1 if g.parse_vertex(u)[0] == t else 0
        for c in range(lo, late + g.period + g.max_drift + 1):
            w = vname(t, c)
            for e in g.edges_from(w):
                if g.is_rail_edge(e) or ".h" in e:
                    continue
                k = self.paths(u, g.r(e))
                if not k:
                    continue
                if c >= late + g.max_drift:
                    return INF, {"kind": "pumping", "landing": e, "column": c, "period": g.period}
                total += k
        return total, {"kind": "exact"}


def count_shift_class_in_cylinder(graph, x, alpha: FinitePath, budget: int | None = None):
    """The number of paths in ``alpha E^infinity`` shift equivalent to ``x``.

    Returns an integer, ``inf``, or an Unknown verdict.
    """
    if isinstance(graph, DirectedGraph):
        if find_cycles(graph).cycles:
            return unknown("non-principal")
        return 0
    g: ColumnTemplate = graph
    if not g.regular:
        return unknown("structure outside the exact class", budget)
    u = alpha.s(g)
    if not isinstance(x, TailAnchored):
        return unknown("paths of this kind do not occur in column templates in the exact class", budget)
    line = x.line
    if ".h" in u:
        t, c, _ = g.parse_vertex(u)
        return 1 if line == ("hair", t, c) else 0
    counter = _counter(g)
    if line[0] == "hair":
        _, t, c = line
        return counter.paths(u, vname(t, c))
    n, cert = counter.rail(u, line[1])
    return n


_COUNTERS: dict[int, tuple[ColumnTemplate, _Counter]] = {}


def _counter(g: ColumnTemplate) -> _Counter:
    hit = _COUNTERS.get(id(g))
    if hit is None or hit[0] is not g:
        hit = (g, _Counter(g))
        _COUNTERS[id(g)] = hit
    return hit[1]


def brute_count(g: ColumnTemplate, x, alpha: FinitePath, depth: int) -> int:
    """Paths ``alpha mu`` with ``|mu| <= depth`` that first meet the tail line of ``x`` at their end.

    Reference count used to cross-check ``count_shift_class_in_cylinder``.
    """
    line = x.line
    out = 0
    stack = [(alpha.s(g), 0, False)]
    while stack:
        v, k, _ = stack.pop()
        t, c, d = g.parse_vertex(v)
        on = (line[0] == "rail" and d == 0 and t == line[1]) or (line[0] == "hair" and (t, c) == line[1:] and d == 0)
        if on:
            out += 1
            if line[0] == "rail":
                # keep going only off the rail
                for e in g.edges_into(v):
                    if not g.is_rail_edge(e) and ".h" not in e and k < depth:
                        stack.append((g.s(e), k + 1, False))
            continue
        if k < depth and ".h" not in v:
            for e in g.edges_into(v):
                if ".h" not in e:
                    stack.append((g.s(e), k + 1, False))
    return out


# -- sequence families ---------------------------------------------------------------


Witness = Callable[[int], GroupoidElement]


@dataclass
class SequenceFamily:
    """A sequence ``x(n)`` and limit paths with per-limit witness sequences.

    ``period`` and ``stable_from`` form the family's eventual-periodicity
    contract: for ``n >= stable_from(m)`` the counts ``c(m, n)`` depend only on
    ``n mod period``.  ``divergent`` declares that the two witness channels
    separate at an index that grows without bound.
    """

    name: str
    graph: ColumnTemplate
    member: Callable[[int], object]
    limits: dict[str, tuple[object, list[Witness]]]
    start: int = 1
    period: int = 1
    stable_from: Callable[[int], int] = lambda m: m + 2
    divergent: bool = True

    @property
    def z(self):
        return next(iter(self.limits.values()))[0]


def cylinder(graph, z, m: int) -> FinitePath:
    return segment(z, 0, m, graph)


def multiplicity_profile(family: SequenceFamily, cylinder_depths: range, index_window: range) -> dict:
    """Counts ``c(m, n)``, ``lambda_z`` per cylinder, and the lower and upper multiplicities.

    ``M_L`` and ``M_U`` are the least (over cylinders) lim inf and lim sup of
    ``c(m, n) / lambda_z``, evaluated on the stable part of the window.
    """
    g, z = family.graph, family.z
    table: dict[int, dict[int, object]] = {}
    lam_z: dict[int, object] = {}
    lows, highs, flags = [], [], {}
    certified = True
    for m in cylinder_depths:
        alpha = cylinder(g, z, m)
        lz = count_shift_class_in_cylinder(g, z, alpha)
        lam_z[m] = lz
        row = {n: count_shift_class_in_cylinder(g, family.member(n), alpha) for n in index_window}
        table[m] = row
        if any(isinstance(v, Verdict) for v in row.values()) or isinstance(lz, Verdict) or not lz:
            certified = False
            flags[m] = "undecided"
            continue
        n0 = max(family.stable_from(m), index_window.start)
        tail = [n for n in index_window if n >= n0]
        p = family.period
        covered = len(tail) >= 2 * p
        periodic = all(row[n] == row[n + p] for n in tail if n + p in row)
        flags[m] = "stable" if covered and periodic else "unstable"
        if flags[m] != "stable":
            certified = False
            tail = tail or list(index_window)
        last = [row[n] / lz for n in tail[-p:]] if covered else [row[n] / lz for n in tail]
        lows.append(min(last))
        highs.append(max(last))

    def num(v):
        return int(v) if isinstance(v, float) and v.is_integer() else v

    return {
        "family": family.name,
        "M_L": num(min(lows)) if lows else None,
        "M_U": num(min(highs)) if highs else None,
        "certified": certified and bool(lows),
        "status": "Certified" if certified and lows else "Empirical",
        "cylinders": [cylinder_depths.start, cylinder_depths.stop],
        "window": [index_window.start, index_window.stop],
        "lambda_z": {str(m): jsonable(v if not isinstance(v, Verdict) else v.to_dict()) for m, v in lam_z.items()},
        "counts": {
            str(m): {str(n): jsonable(v if not isinstance(v, Verdict) else v.to_dict()) for n, v in row.items()}
            for m, row in table.items()
        },
        "stabilization": {str(m): f for m, f in flags.items()},
    }


def _divergence(graph, g: GroupoidElement) -> int:
    """Largest index ``i`` with ``x_i != y_{i - n}`` (0 when the paths agree after the lag)."""
    x, y, n = g.x, g.y, g.n
    if isinstance(x, TailAnchored) and isinstance(y, TailAnchored):
        bound = max(len(x.head), len(y.head) + n) + 2
    elif isinstance(x, UP) and isinstance(y, UP):
        bound = max(len(x.head), len(y.head) + n) + len(x.cycle) + len(y.cycle)
    else:
        bound = int(max(length(x), length(y)))
    last = 0
    for i in range(max(1, n + 1), bound + 1):
        if x.edge_at(i) != y.edge_at(i - n):
            last = i
    return last


def default_escape_cover(family: SequenceFamily, limit: str, depth: int) -> list[BasisSet]:
    """Basis sets around the limit: ``Z(z(0,m), z(0,m))`` for ``m <= depth``."""
    g = family.graph
    z = family.limits[limit][0]
    return [BasisSet(cylinder(g, z, m), cylinder(g, z, m)) for m in range(depth + 1)]


def k_times_witness_check(
    family: SequenceFamily,
    limit: str | None = None,
    witnesses: list[Witness] | None = None,
    window: range = range(1, 33),
    cylinders: int = 6,
    escape_cover: list[BasisSet] | None = None,
) -> dict:
    """Conditions (i)-(iii) of k-times convergence of ``x(n)`` to the limit, over the window.

    (i) ``s(gamma_n^i) = x(n)`` exactly; (ii) every cylinder ``Z(z(0, m))``
    eventually contains ``r(gamma_n^i)``; (iii) ``gamma_n^j (gamma_n^i)^{-1}``
    eventually leaves every basis set of the cover.
    """
    g = family.graph
    limit = limit or next(iter(family.limits))
    z, default = family.limits[limit]
    ws = witnesses if witnesses is not None else default
    cover = escape_cover if escape_cover is not None else default_escape_cover(family, limit, cylinders)
    idx = list(window)
    gam = [[w(n) for n in idx] for w in ws]
    ok1 = all(gam[i][j].y == family.member(n) for i in range(len(ws)) for j, n in enumerate(idx))
    # (ii): last index where the range misses the cylinder must sit in the first half of the window
    half = idx[len(idx) // 2]
    ok2, conv = True, {}
    for m in range(cylinders + 1):
        alpha = cylinder(g, z, m)
        misses = [n for j, n in enumerate(idx) for i in range(len(ws)) if not _starts_with(g, gam[i][j].x, alpha)]
        conv[str(m)] = (max(misses) + 1) if misses else idx[0]
        if misses and max(misses) >= half:
            ok2 = False
    # (iii)
    ok3, esc = True, {}
    divergence_grows = True
    for i in range(len(ws)):
        for j in range(i + 1, len(ws)):
            prods = [gam[j][t] * gam[i][t].inverse() for t in range(len(idx))]
            div = [_divergence(g, p) for p in prods]
            if any(b <= a for a, b in zip(div, div[1:])):
                divergence_grows = False
            for b, Z in enumerate(cover):
                inside = [n for t, n in enumerate(idx) if basis_member(prods[t], Z)]
                esc[f"{i + 1},{j + 1}:{b}"] = inside[-1] if inside else None
                if inside and inside[-1] >= half:
                    ok3 = False
    cert = family.divergent and divergence_grows and ok3
    return {
        "family": family.name,
        "limit": limit,
        "k": len(ws),
        "window": [window.start, window.stop],
        "conditions": {
            "i": {"ok": ok1, "status": "Certified"},
            "ii": {"ok": ok2, "status": "Certified" if ok2 else "Empirical", "enter_by": conv},
            "iii": {
                "ok": ok3,
                "status": "Certified" if cert else "Empirical",
                "last_inside": esc,
                "cover": [Z.to_dict() for Z in cover],
            },
        },
        "passed": ok1 and ok2 and ok3,
        "certified": ok1 and ok2 and ok3 and cert,
    }
