import functools
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckgraph import families
from ckgraph.classify import boundary_family
from ckgraph.desourcify import (
    DesourcedMorphismClass,
    DesourcedVertexClass,
    add_heads,
    compose_tilde,
    head_edge,
    head_vertex,
    identity,
    kappa,
    kappa_shift_equivalent,
    materialize_truncation,
    p_equiv,
    v_equiv,
)
from ckgraph.digraph import DirectedGraph, sources, validate
from ckgraph.kgraph import add, boundary_paths_finite, graph_as_kgraph, kdegree, kshift, kshift_equivalent, leq, omega, product_path
from ckgraph.paths import shift_equivalent
from oracles import product_pairs

LAM = omega(2, (3, 2))
XS = boundary_paths_finite(LAM)
BOX = (5, 4)
degrees = st.tuples(st.integers(0, BOX[0]), st.integers(0, BOX[1]))
vreps = st.tuples(st.sampled_from(XS), degrees)


@st.composite
def preps(draw):
    x = draw(st.sampled_from(XS))
    m = draw(degrees)
    d = draw(st.tuples(st.integers(0, 2), st.integers(0, 2)))
    return x, (m, add(m, d))


# -- equivalence laws ---------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(vreps, vreps, vreps)
def test_vertex_relation_is_an_equivalence(a, b, c):
    assert v_equiv(LAM, a, a)
    assert v_equiv(LAM, a, b) == v_equiv(LAM, b, a)
    if v_equiv(LAM, a, b) and v_equiv(LAM, b, c):
        assert v_equiv(LAM, a, c)
    ka = DesourcedVertexClass(*a, LAM)
    kb = DesourcedVertexClass(*b, LAM)
    assert (ka == kb) == v_equiv(LAM, a, b)


@settings(max_examples=300, deadline=None)
@given(preps(), preps(), preps())
def test_morphism_relation_is_an_equivalence(a, b, c):
    assert p_equiv(LAM, a, a)
    assert p_equiv(LAM, a, b) == p_equiv(LAM, b, a)
    if p_equiv(LAM, a, b) and p_equiv(LAM, b, c):
        assert p_equiv(LAM, a, c)
    ca = DesourcedMorphismClass(a[0], *a[1], LAM)
    cb = DesourcedMorphismClass(b[0], *b[1], LAM)
    assert (ca == cb) == p_equiv(LAM, a, b)
    # equivalent morphisms have equivalent endpoints
    if p_equiv(LAM, a, b):
        assert ca.range == cb.range and ca.source == cb.source


# -- composition ----------------------------------------------------------------------


def _all_reps(box=(4, 3), span=2):
    out = {}
    for x in XS:
        for m in itertools.product(range(box[0] + 1), range(box[1] + 1)):
            for d in itertools.product(range(span + 1), repeat=2):
                c = DesourcedMorphismClass(x, m, add(m, d), LAM)
                out.setdefault(c, []).append(c)
    return out


REPS = _all_reps()
CLASSES = sorted(REPS, key=lambda c: c.name)


def _composable(rng, a):
    cands = [b for b in CLASSES if b.range == a.source]
    return rng.choice(cands) if cands else None


def test_compose_is_independent_of_representatives():
    rng = random.Random(11)
    checked = 0
    for _ in range(150):
        a = rng.choice(CLASSES)
        b = _composable(rng, a)
        if b is None:
            continue
        want = compose_tilde(a, b)
        for a2 in rng.sample(REPS[a], min(3, len(REPS[a]))):
            for b2 in rng.sample(REPS[b], min(3, len(REPS[b]))):
                got = compose_tilde(a2, b2)
                assert got == want
                checked += 1
    assert checked > 300


def test_compose_is_associative_with_identities():
    rng = random.Random(12)
    triples = 0
    for _ in range(300):
        a = rng.choice(CLASSES)
        b = _composable(rng, a)
        c = _composable(rng, b) if b is not None else None
        if c is None:
            continue
        ab, bc = compose_tilde(a, b), compose_tilde(b, c)
        assert compose_tilde(ab, c) == compose_tilde(a, bc)
        assert ab.degree == add(a.degree, b.degree)
        assert ab.range == a.range and ab.source == b.source
        assert compose_tilde(identity(a.range), a) == a == compose_tilde(a, identity(a.source))
        triples += 1
    assert triples > 100


def test_compose_rejects_non_composable():
    a = next(c for c in CLASSES if any(c.degree))
    bad = next(b for b in CLASSES if b.range != a.source)
    with pytest.raises(ValueError):
        compose_tilde(a, bad)


# -- kappa ------------------------------------------------------------------------------


def test_kappa_preserves_shift_equivalence_both_ways():
    rng = random.Random(99)
    pairs = 0
    for e, f, lam, (x1, x2), (y1, y2) in product_pairs(rng, 220):
        x = product_path(lam, e, f, x1, x2)
        y = product_path(lam, e, f, y1, y2)
        l1, l2 = shift_equivalent(x1, y1, e), shift_equivalent(x2, y2, f)
        lags = {(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(2)}
        if l1 and l2:
            lags.add((l1.some(), l2.some()))
        for n in lags:
            want = n[0] in l1 and n[1] in l2
            assert (kshift_equivalent(lam, x, y, n) is not None) == want
            assert (kappa_shift_equivalent(lam, x, y, n) is not None) == want, (str(x), str(y), n)
        pairs += 1
    assert pairs >= 200


@functools.lru_cache(maxsize=None)
def _sigma_cases():
    out = []
    rng = random.Random(4)
    for e, f, lam, (x1, x2), _ in product_pairs(rng, 15):
        out.append((lam, product_path(lam, e, f, x1, x2)))
    for name in ["corner", "robertson"]:
        lam = families.build(name)
        out += [(lam, x) for x in boundary_family(lam)["inf"][:3]]
    out += [(LAM, x) for x in XS]
    return out


@pytest.mark.parametrize("case", range(len(_sigma_cases())))
def test_shift_commutes_with_kappa(case):
    lam, x = _sigma_cases()[case]
    d = kdegree(lam, x)
    for n in itertools.product(*(range(int(min(c, 2)) + 1) for c in d)):
        assert leq(n, d)
        box = (3,) * lam.k
        assert kappa(lam, kshift(lam, x, n)).window_keys(box) == kappa(lam, x).shift(n).window_keys(box)


def test_kappa_rejects_non_boundary_paths():
    lam = omega(2, (1, 1))
    with pytest.raises(ValueError):
        kappa(lam, lam.vertex("0,0"))


# -- truncations -------------------------------------------------------------------------


def test_robertson_truncation_counts():
    tr = materialize_truncation(families.robertson(), (3, 3), range(0, 4))
    counts = tr.column_counts()
    for c in range(4):
        assert counts[c] == (24, 43)
    assert tr.sourceless_interior() == []
    assert tr.missing == []


def test_truncation_fragment_is_a_kgraph():
    from ckgraph.kgraph import validate_kgraph

    tr = materialize_truncation(omega(2, (1, 1)), (2, 2))
    frag = tr.fragment()
    assert frag.k == 2
    assert tr.sourceless_interior() == []
    # the fragment's squares are well formed, even if boundary squares are absent
    assert "bad_square" not in validate_kgraph(frag).kinds()
    for v in ["0,0", "1,1"]:
        assert tr.iota[v] in tr.vertices


@pytest.mark.parametrize(
    "g",
    [
        DirectedGraph("abcd", [("e", "a", "b"), ("f", "a", "c"), ("g", "b", "d"), ("h", "c", "d"), ("k", "a", "d")]),
        DirectedGraph("abc", [("e", "a", "b"), ("f", "a", "c")]),
        DirectedGraph("ab", [("e", "a", "b"), ("f", "a", "b")]),
    ],
)
@pytest.mark.parametrize("n", [1, 3])
def test_one_graph_desourcification_is_adding_heads(g, n):
    tr = materialize_truncation(graph_as_kgraph(g), (n,))
    stage = add_heads(g).stage(n)

    def vmap(name):
        base, exc = name.split("~")
        return base if exc == "0" else head_vertex(base, int(exc))

    def emap(c):
        (r, es), (exc,), _ = c.key
        return es[0] if es else head_edge(r, exc + 1)

    edges = {(emap(c), vmap(c.range.name), vmap(c.source.name)) for c in tr.edges.values()}
    assert {vmap(v) for v in tr.vertices} == set(stage.vertices)
    assert edges == {(e.id, e.r, e.s) for e in stage.edges}


def test_add_heads_stages():
    g = DirectedGraph("ab", [("e", "a", "b")])
    fam = add_heads(g)
    s = fam.stage(2)
    assert validate(s).valid
    assert sources(s) == {head_vertex("b", 2)}
    assert fam.frontier(2) == {head_vertex("b", 2)}
