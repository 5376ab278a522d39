"""Classification verdicts for directed graphs and k-graphs.

Finite directed graphs are decided by structural criteria on cycles and
entries.  Column templates in the exact class (see
:attr:`~ckgraph.digraph.ColumnTemplate.regular`) are decided by counting and
splitting-pair searches over windows after which everything repeats with the
template period.  k-graphs are checked over their representable boundary
paths.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .digraph import (
    ColumnTemplate,
    DirectedGraph,
    cycle_entries,
    find_cycles,
    is_cofinal,
    reachable,
    sources,
    vname,
)
from .kgraph import (
    INF,
    KGraph,
    KInf,
    boundary_member,
    boundary_paths_finite,
    kdegree,
    kequal,
    klag_search,
    kprefix,
    kshift,
    kshift_equivalent,
    kvertex,
    leq,
    sub,
    _positions,
)
from .paths import FinitePath, TailAnchored, UP, segment, shift
from .verdict import NO, UNKNOWN, YES, Verdict, jsonable, no, unknown, yes

PROPERTIES = (
    "principal",
    "af",
    "simple",
    "liminal",
    "postliminal",
    "bounded_trace",
    "fell",
    "continuous_trace",
)

# strongest first
CHAIN = ("continuous_trace", "fell", "bounded_trace", "liminal", "postliminal")


@dataclass
class ClassificationReport:
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    budget: dict = field(default_factory=dict)

    def __getitem__(self, prop: str) -> Verdict:
        return self.verdicts[prop]

    def to_dict(self) -> dict:
        out = {p: self.verdicts[p].to_dict() for p in PROPERTIES}
        for p in PROPERTIES:
            out[p].setdefault("budget_used", self.verdicts[p].budget_used)
        return out

    @property
    def unknown_count(self) -> int:
        return sum(1 for v in self.verdicts.values() if v.value == UNKNOWN)


def propagate(verdicts: dict[str, Verdict]) -> dict[str, Verdict]:
    """Fill undecided links of the implication chain; raise on a contradiction."""
    out = dict(verdicts)
    for i, strong in enumerate(CHAIN):
        for weak in CHAIN[i + 1:]:
            s, w = out[strong], out[weak]
            if s.value == YES and w.value == NO:
                raise AssertionError(f"{strong} Yes but {weak} No")
    for i, strong in enumerate(CHAIN):
        if out[strong].value == YES:
            for weak in CHAIN[i + 1:]:
                if out[weak].value == UNKNOWN:
                    out[weak] = yes({"kind": "implied", "by": strong})
    for i in range(len(CHAIN) - 1, -1, -1):
        weak = CHAIN[i]
        if out[weak].value == NO:
            for strong in CHAIN[:i]:
                if out[strong].value == UNKNOWN:
                    out[strong] = no({"kind": "implied", "by": weak, "certificate": out[weak].certificate})
    return out


def chain_consistent(report: ClassificationReport) -> bool:
    v = report.verdicts
    for i, strong in enumerate(CHAIN):
        for weak in CHAIN[i + 1:]:
            if v[strong].value == YES and v[weak].value == NO:
                return False
    return True


# ---------------------------------------------------------------------------
# directed graphs


def classify_digraph(E: DirectedGraph | ColumnTemplate, budget: int | None = None) -> ClassificationReport:
    """All eight verdicts for a finite graph or a column template."""
    if isinstance(E, ColumnTemplate):
        return _classify_template(E, budget)
    return _classify_finite(E)


def _classify_finite(E: DirectedGraph) -> ClassificationReport:
    cycles = list(find_cycles(E))
    v: dict[str, Verdict] = {}
    if cycles:
        c = cycles[0]
        v["principal"] = no({"kind": "cycle", "cycle": list(c.edges)})
        v["af"] = no({"kind": "cycle", "cycle": list(c.edges)})
    else:
        v["principal"] = yes({"kind": "no_cycles"})
        v["af"] = yes({"kind": "no_cycles"})
    entries = {c: cycle_entries(E, c) for c in cycles}
    bare = [c for c in cycles if not entries[c]]
    if bare:
        v["simple"] = no({"kind": "cycle_without_entry", "cycle": list(bare[0].edges)})
    else:
        cof = is_cofinal(E)
        v["simple"] = yes({"kind": "entries_and_cofinal"}) if cof else no({"kind": "not_cofinal", **cof.certificate})
    with_entry = [(c, f) for c in cycles for f in sorted(entries[c])]
    if with_entry:
        c, f = with_entry[0]
        v["liminal"] = no({"kind": "cycle_entry", "cycle": list(c.edges), "entry": f})
    else:
        v["liminal"] = yes({"kind": "no_cycle_entries"})
    on_cycle = {e: c for c in cycles for e in c.edges}
    bad = [(c, f) for c, f in with_entry if f in on_cycle]
    if bad:
        c, f = bad[0]
        v["postliminal"] = no(
            {"kind": "entry_on_cycle", "cycle": list(c.edges), "entry": f, "entry_cycle": list(on_cycle[f].edges)}
        )
    else:
        v["postliminal"] = yes({"kind": "no_entry_on_a_cycle"})
    if not cycles:
        m = _max_paths_to_sources(E)
        v["bounded_trace"] = yes({"kind": "bound", "M": m})
        v["fell"] = yes({"kind": "finite_path_space"})
        v["continuous_trace"] = yes({"kind": "finite_path_space"})
    else:
        for p in ("bounded_trace", "fell", "continuous_trace"):
            v[p] = unknown("non-principal")
    return ClassificationReport(propagate(v), {"exact": True})


def _max_paths_to_sources(E: DirectedGraph) -> int:
    """Largest number of paths from one vertex to one source (acyclic graphs)."""
    srcs = sources(E)

    @lru_cache(maxsize=None)
    def count(v: str, s: str) -> int:
        return (v == s) + sum(count(E.s(e), s) for e in E.edges_into(v))

    return max((count(v, s) for v in E.vertices for s in srcs), default=0)


# -- column templates ---------------------------------------------------------


def _landing_cols(g: ColumnTemplate, v: str, t: str, lo: int, hi: int) -> list[int]:
    """Columns ``c`` in ``[lo, hi)`` where some path from ``v`` lands on track ``t`` by a non-rail edge."""
    reach = reachable(g, [v], max_col=hi, hairs=False)
    out = []
    for c in range(lo, hi):
        w = vname(t, c)
        if w == v:
            out.append(c)
            continue
        if any(not g.is_rail_edge(e) and g.r(e) in reach for e in g.edges_from(w)):
            out.append(c)
    return out


def _rail_count(g: ColumnTemplate, v: str, t: str, hi: int, count) -> int:
    """Number of paths from ``v`` that end riding the rail on ``t`` (landings below ``hi``)."""
    total = 0
    for c in _landing_cols(g, v, t, g.origin, hi):
        w = vname(t, c)
        total += 1 if w == v else sum(count(g.r(e), w) for e in g.edges_from(w) if not g.is_rail_edge(e) and g.col(g.r(e)) >= g.col(v))
    return total


def _classify_template(g: ColumnTemplate, budget: int | None) -> ClassificationReport:
    v: dict[str, Verdict] = {}
    if not g.regular:
        reason = "structure outside the exact class: " + "; ".join(g.irregularities)
        for p in PROPERTIES:
            v[p] = unknown(reason, budget)
        return ClassificationReport(v, {"exact": False})
    p, L, D = g.period, g.slack, g.max_drift
    v["principal"] = yes({"kind": "no_cycles", "reason": "columns never decrease and drift-0 edges are acyclic"})
    v["af"] = yes({"kind": "no_cycles"})
    cof = is_cofinal(g, budget)
    if cof.value == YES:
        v["simple"] = yes({"kind": "no_cycles_and_cofinal"})
    elif cof.value == NO:
        v["simple"] = no({"kind": "not_cofinal", **cof.certificate})
    else:
        v["simple"] = cof
    reps = g.representatives()
    windows = {w: g.base(w) + L + p for w in reps}
    used = max(windows.values()) + D + p
    if budget is not None and budget < used:
        for q in ("liminal", "postliminal", "bounded_trace", "fell", "continuous_trace"):
            v[q] = unknown("budget", budget)
        return ClassificationReport(propagate(v), {"exact": False, "window": used})

    @lru_cache(maxsize=None)
    def count(a: str, b: str) -> int:
        if a == b:
            return 1
        if g.col(a) > g.col(b):
            return 0
        return sum(count(g.s(e), b) for e in g.edges_into(a) if ".h" not in g.s(e))

    # liminal: finitely many landings on every rail from every vertex
    lim = yes({"kind": "finite_shift_classes"})
    for w in reps:
        b = g.base(w)
        for t in sorted(g.rails):
            late = _landing_cols(g, w, t, b + L, b + L + p)
            if late:
                lim = no({"kind": "infinite_shift_class", "vertex": w, "track": t, "landing_column": late[0], "period": p})
                break
        if lim.value == NO:
            break
    v["liminal"] = lim
    # postliminal: from some x(n) on each rail, the rail is the only way back onto it
    post = yes({"kind": "rail_isolated"})
    for t in sorted(g.rails):
        ok = None
        for c in range(g.c0, g.c0 + p):
            w = vname(t, c)
            if _landing_cols(g, w, t, c + 1, g.base(w) + L + p + D) == []:
                ok = c
                break
        if ok is None:
            w = vname(t, g.c0)
            back = _landing_cols(g, w, t, g.c0 + 1, g.base(w) + L + p + D)
            post = no({"kind": "return_to_rail", "track": t, "from": w, "landing_column": back[0]})
            break
    v["postliminal"] = post
    # bounded trace: uniform bound on shift-class counts
    if lim.value == YES:
        m = 0
        for w in reps:
            hi = windows[w] + D
            for t in g.tracks:
                for c in range(g.col(w), hi + 1):
                    x = vname(t, c)
                    if g.has_hair(t, c) or not g.edges_into(x):
                        m = max(m, count(w, x))
            for t in g.rails:
                m = max(m, _rail_count(g, w, t, hi, count))
        v["bounded_trace"] = yes({"kind": "bound", "M": m})
    else:
        v["bounded_trace"] = no({"kind": "implied", "by": "liminal", "certificate": lim.certificate})
    # Fell: along every rail the cone eventually has finitely many splitting pairs
    fell = yes({"kind": "finite_splitting_pairs_along_rails"})
    for t in sorted(g.rails):
        w = vname(t, g.c0)
        pair = _late_splitting_pair(g, w)
        if pair is not None:
            fell = no({"kind": "infinite_splitting_pairs", "track": t, "vertex": w, **pair})
            break
    v["fell"] = fell
    cts = yes({"kind": "finite_splitting_pairs_in_every_cone"})
    for w in reps:
        pair = _late_splitting_pair(g, w)
        if pair is not None:
            cts = no({"kind": "infinite_splitting_pairs", "vertex": w, **pair})
            break
    v["continuous_trace"] = cts
    return ClassificationReport(propagate(v), {"exact": True, "window": used})


def _late_splitting_pair(g: ColumnTemplate, w: str) -> dict | None:
    """A splitting pair in the cone of ``w`` in the periodic window, if any.

    Columns never decrease along paths, so one period past ``base + L + Dmax``
    stands for all later columns.
    """
    lo = g.base(w) + g.slack + g.max_drift
    hi = lo + g.period
    reach = reachable(g, [w], max_col=hi, hairs=False)
    for c in range(lo, hi):
        for t in g.tracks:
            x = vname(t, c)
            es = sorted(e for e in g.edges_from(x) if g.r(e) in reach)
            if len(es) >= 2:
                return {"pair": es[:2], "column": c, "period": g.period}
    return None


# ---------------------------------------------------------------------------
# monolithic extensions


def monolithic_extension(pair, base, graph=None):
    """The common suffix ``t`` with ``x = eta t`` and ``y = zeta t``, or None."""
    (x, y), (eta, zeta) = pair, base
    if isinstance(graph, KGraph):
        lam = graph
        if eta.s(lam) != zeta.s(lam):
            return None
        de, dz = lam.degree(eta), lam.degree(zeta)
        if not (leq(de, kdegree(lam, x)) and leq(dz, kdegree(lam, y))):
            return None
        if kprefix(lam, x, de).edges != eta.edges or kprefix(lam, y, dz).edges != zeta.edges:
            return None
        if kprefix(lam, x, de).s(lam) != eta.s(lam) or kprefix(lam, y, dz).s(lam) != zeta.s(lam):
            return None
        tx, ty = kshift(lam, x, de), kshift(lam, y, dz)
        return tx if kequal(lam, tx, ty) else None
    g = graph or getattr(x, "graph", None)
    if eta.s(g) != zeta.s(g):
        return None
    try:
        if segment(x, 0, len(eta), g) != eta or segment(y, 0, len(zeta), g) != zeta:
            return None
        if segment(x, len(eta), len(eta), g).at != eta.s(g):
            return None
    except IndexError:
        return None
    tx, ty = shift(x, len(eta), g), shift(y, len(zeta), g)
    return tx if tx == ty else None


# ---------------------------------------------------------------------------
# k-graphs


def classify_kgraph(lam: KGraph, scope: int = 2, budget: int | None = None) -> ClassificationReport:
    """All eight verdicts for a k-graph.

    ``scope`` bounds the degree of prefixes and tails (in every coordinate)
    of the boundary paths searched.
    """
    if lam.k == 1:
        return classify_digraph(lam.sk, budget)
    if lam.finite and lam.acyclic:
        return _classify_finite_acyclic(lam)
    v: dict[str, Verdict] = {}
    fam = boundary_family(lam, scope)
    v["principal"] = _principal(lam, fam, scope)
    v["af"] = unknown("no criterion applied for this k-graph", scope)
    v["simple"] = unknown("no criterion applied for this k-graph", scope)
    if v["principal"].value != YES:
        for p in CHAIN:
            v[p] = unknown("non-principal" if v["principal"].value == NO else "principality undecided", scope)
        return ClassificationReport(v, {"scope": scope})
    for p in CHAIN:
        v[p] = unknown("not decided for this k-graph", scope)
    if lam.periodic:
        v["continuous_trace"] = _cts_periodic(lam, fam, scope)
    return ClassificationReport(propagate(v), {"scope": scope})


def _classify_finite_acyclic(lam: KGraph) -> ClassificationReport:
    bps = boundary_paths_finite(lam)
    classes: dict[str, list] = {}
    for x in bps:
        classes.setdefault(x.s(lam), []).append(x)
    v: dict[str, Verdict] = {}
    v["principal"] = yes({"kind": "finite_boundary_paths"})
    v["af"] = yes({"kind": "finite_dimensional", "classes": len(classes)})
    if len(classes) <= 1:
        v["simple"] = yes({"kind": "one_shift_class"})
    else:
        a, b = sorted(classes)[:2]
        v["simple"] = no({"kind": "two_shift_classes", "x": classes[a][0], "y": classes[b][0]})
    per_vertex = max(
        (sum(1 for x in xs if x.r(lam) == r) for xs in classes.values() for r in {x.r(lam) for x in xs}), default=0
    )
    v["liminal"] = yes({"kind": "finite_boundary_paths", "classes": len(classes)})
    v["postliminal"] = yes({"kind": "finite_boundary_paths"})
    v["bounded_trace"] = yes({"kind": "bound", "M": per_vertex})
    v["fell"] = yes({"kind": "finite_boundary_paths"})
    v["continuous_trace"] = yes({"kind": "monolithic_cover", "F": [str(x) for x in bps]})
    return ClassificationReport(v, {"exact": True})


def _start_vertices(lam: KGraph) -> list[str]:
    if lam.finite:
        return list(lam.vertices)
    g = lam.sk
    return [vname(t, c) for c in range(g.origin, g.c0 + g.period) for t in g.tracks]


def _closing_shift(lam: KGraph, tau: FinitePath) -> int | None:
    a, b = tau.r(lam), tau.s(lam)
    if lam.finite:
        return 0 if a == b else None
    ta, ca, da = lam.sk.parse_vertex(a)
    tb, cb, db = lam.sk.parse_vertex(b)
    t = cb - ca
    if ta == tb and da == db == 0 and t > 0 and t % lam.sk.period == 0:
        return t
    return None


def boundary_family(lam: KGraph, scope: int = 2, starts: list[str] | None = None) -> dict:
    """Representable boundary paths from the representative vertices.

    Returns ``{"inf": [...], "finite": [...], "ladders": [...]}``: infinite
    ``prefix tail^...`` paths in the boundary, finite boundary paths of degree
    at most ``scope``, and ladders ``(x, m, e)`` whose members
    ``x(0, m + q d(tail)) T^{qt}(e)`` end at vertices receiving nothing.
    """
    infs: list[KInf] = []
    finite: list[FinitePath] = []
    ladders: list[tuple] = []
    bound = (scope,) * lam.k
    for u in _start_vertices(lam) if starts is None else starts:
        for mu in lam.morphisms_below(u, bound):
            if boundary_member(lam, mu).value == YES:
                if not any(mu.edges == f.edges and mu.r(lam) == f.r(lam) for f in finite):
                    finite.append(mu)
            for tau in lam.morphisms_below(mu.s(lam), bound):
                if not tau.edges:
                    continue
                t = _closing_shift(lam, tau)
                if t is None:
                    continue
                x = KInf(mu, tau, t, graph=lam)
                for m in _positions(lam, x):
                    if not leq(lam.degree(mu), m):
                        continue
                    w = kvertex(lam, x, m)
                    for e in lam.edges_into(w):
                        if lam.total_source(lam.s(e)):
                            ladders.append((x, m, e))
                if any(kequal(lam, x, y) for y in infs):
                    continue
                if boundary_member(lam, x).value == YES:
                    infs.append(x)
    return {"inf": infs, "finite": finite, "ladders": ladders}


def _principal(lam: KGraph, fam: dict, scope: int) -> Verdict:
    if lam.acyclic and len(lam.moving_colors) <= 1:
        return yes({"kind": "single_moving_color", "reason": "an infinite path is infinite in one coordinate only and never revisits a vertex"})
    found = [(x, n) for x in fam["inf"] for n in klag_search(lam, x, x, scope) if any(n)]
    if found:
        x, n = min(found, key=lambda xn: (sum(abs(c) for c in xn[1]), tuple(-c for c in xn[1])))
        w = kshift_equivalent(lam, x, x, n)
        return no({"kind": "self_lag", "path": x, "lag": list(n), "m": list(w["m"])})
    return unknown("no self-equivalence with nonzero lag among representable paths", scope)


def _merge_pairs(lam: KGraph, x: FinitePath, y: FinitePath) -> set[tuple]:
    """Minimal merge pairs of two finite paths with a common source."""
    dx, dy = lam.degree(x), lam.degree(y)
    n = sub(dx, dy)
    ok = []
    for m in itertools.product(*(range(d + 1) for d in dx)):
        mm = sub(m, n)
        if any(c < 0 for c in mm) or not leq(mm, dy):
            continue
        if lam.factor(x, m)[1].edges == lam.factor(y, mm)[1].edges and kvertex(lam, x, m) == kvertex(lam, y, mm):
            ok.append(m)
    mins = [m for m in ok if not any(o != m and leq(o, m) for o in ok)]
    return {(str(lam.factor(x, m)[0]), str(lam.factor(y, sub(m, n))[0])) for m in mins}


def _cts_periodic(lam: KGraph, fam: dict, scope: int) -> Verdict:
    """Finitely many minimal merge pairs among equivalent boundary paths from each finite vertex set.

    Infinite representable paths and finite ones of bounded degree contribute
    finitely many pairs.  Ladders contribute infinitely many members; their
    pairs must stop producing new minimal merge pairs once the members are a
    few translation periods long.
    """
    F: set[tuple] = set()
    for x, y in itertools.product(fam["inf"], repeat=2):
        for n in klag_search(lam, x, y, scope + 1):
            w = kshift_equivalent(lam, x, y, n)
            F.add((str(kprefix(lam, x, w["m"])), str(kprefix(lam, y, sub(w["m"], n)))))
    fins = fam["finite"]
    for x, y in itertools.product(fins, repeat=2):
        if x.s(lam) == y.s(lam):
            F |= _merge_pairs(lam, x, y)
    ladders = fam["ladders"]

    def member(lad, q: int) -> FinitePath:
        x, m, e = lad
        dt = lam.degree(x.tail)
        mq = tuple(m[i] + q * dt[i] for i in range(lam.k))
        return lam.morph(kprefix(lam, x, mq).edges + (e if q == 0 else lam.translate_edges((e,), q * x.shift)[0],), x.prefix.r(lam))

    Q = 4
    members: dict[tuple, FinitePath] = {}
    for lad in ladders:
        for q in range(Q + 3):
            mu = member(lad, q)
            members.setdefault((mu.r(lam), mu.edges), mu)
    by_src: dict[str, list[FinitePath]] = {}
    for mu in members.values():
        by_src.setdefault(mu.s(lam), []).append(mu)
    longest = max((sum(lam.degree(mu)) for mu in members.values()), default=0)
    cut = longest - 2 * max((sum(lam.degree(x.tail)) for x, _, _ in ladders), default=0)
    early: set[tuple] = set()
    late: set[tuple] = set()
    for group in by_src.values():
        for xa, xb in itertools.product(group, repeat=2):
            pairs = _merge_pairs(lam, xa, xb)
            (early if sum(lam.degree(xa)) <= cut else late).update(pairs)
    if not late <= early:
        new = sorted(late - early)[0]
        return no({"kind": "unbounded_merges", "pair": list(new)})
    F |= early
    return yes({"kind": "monolithic_cover", "F_size": len(F), "scope": scope})
