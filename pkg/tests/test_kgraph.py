import itertools
import random

import pytest

from ckgraph import families
from ckgraph.digraph import DirectedGraph
from ckgraph.kgraph import (
    INF,
    KGraph,
    boundary_member,
    boundary_paths_finite,
    boundary_representation,
    ck_verify,
    graph_as_kgraph,
    is_exhaustive,
    kdegree,
    klag_search,
    kprefix,
    kshift,
    kshift_equivalent,
    le_infty_member,
    omega,
    parse_kpath,
    product_kgraph,
    product_path,
    validate_kgraph,
)
from ckgraph.paths import shift_equivalent
from oracles import product_pairs

OMEGAS = [(1,), (3,), (2, 2), (3, 2), (1, 3), (1, 1, 1), (2, 1, 1), (1, 2, 2), (INF,), (INF, 2), (2, INF), (INF, 1, 1)]


@pytest.mark.parametrize("m", OMEGAS, ids=str)
def test_omega_builders_validate(m):
    assert validate_kgraph(omega(len(m), m)).valid


def _perturb(lam: KGraph, rng: random.Random) -> KGraph:
    sq = list(lam.square_list)
    edges = sorted({e for v in lam.vertices for e in lam.edges_into(v)})
    i = rng.randrange(len(sq))
    kind = rng.choice(["drop", "edge", "partner", "conflict"])
    (a, b), (c, d) = sq[i]
    if kind == "drop":
        del sq[i]
    elif kind == "edge":
        side = [a, b, c, d]
        j = rng.randrange(4)
        side[j] = rng.choice([e for e in edges if e != side[j]])
        sq[i] = ((side[0], side[1]), (side[2], side[3]))
    elif kind == "partner":
        others = [s for s in sq if s[1] != (c, d)]
        sq[i] = ((a, b), rng.choice(others)[1])
    else:
        others = [s for s in sq if s[1] != (c, d) and s[0] != (c, d)]
        sq.append(((a, b), rng.choice(others)[1]))
    return KGraph(lam.k, lam.sk, lam.colors, sq)


def test_perturbed_square_tables_are_rejected():
    rng = random.Random(2024)
    bases = [omega(2, (2, 2)), omega(2, (3, 2)), omega(3, (1, 1, 1)), omega(3, (2, 1, 1))]
    for trial in range(50):
        lam = _perturb(bases[trial % len(bases)], rng)
        assert not validate_kgraph(lam).valid, lam.square_list


def test_missing_square_is_named():
    lam = omega(2, (1, 1))
    bad = KGraph(2, lam.sk, lam.colors, lam.square_list[1:])
    assert "missing_square" in validate_kgraph(bad).kinds()


def test_products_validate():
    e = DirectedGraph("ab", [("e", "a", "b"), ("f", "b", "b")])
    f = DirectedGraph("xy", [("g", "x", "y"), ("h", "x", "x")])
    assert validate_kgraph(product_kgraph(e, f)).valid


def test_named_kgraphs_validate():
    for name in ["corner", "parallel_rows", "robertson", "omega_2_32", "omega_2_inf2"]:
        assert validate_kgraph(families.build(name)).valid, name


def test_unique_factorization_in_omega():
    lam = omega(2, (3, 2))
    for mu in boundary_paths_finite(lam):
        d = lam.degree(mu)
        for m in itertools.product(range(d[0] + 1), range(d[1] + 1)):
            a, b = lam.factor(mu, m)
            assert lam.degree(a) == m
            assert lam.compose(a, b).edges == mu.edges


def test_omega_boundary_paths():
    lam = omega(2, (3, 2))
    bps = boundary_paths_finite(lam)
    # one maximal path from every vertex
    assert len(bps) == 12
    assert {x.r(lam) for x in bps} == set(lam.vertices)


def test_robertson_path_is_boundary_but_not_maximal():
    lam = families.robertson()
    x = families.robertson_x(lam)
    assert boundary_member(lam, x).value == "Yes"
    assert le_infty_member(lam, x) is False


def test_exhaustive_sets_in_omega():
    lam = omega(2, (1, 1))
    v = "0,0"
    (c1,) = lam.edges_into(v, 1)
    (c2,) = lam.edges_into(v, 2)
    assert is_exhaustive(lam, v, [lam.morph((c1,))]).value == "Yes"
    assert is_exhaustive(lam, v, [lam.morph((c1,)), lam.morph((c2,))]).value == "Yes"
    # the vertex itself meets nothing in the empty set
    assert is_exhaustive(lam, "1,1", []).value == "No"
    assert is_exhaustive(lam, "1,1", [lam.vertex("1,1")]).value == "Yes"


def test_parallel_rows_lag():
    lam = families.parallel_rows()
    fam_lags = []
    from ckgraph.classify import classify_kgraph

    cert = classify_kgraph(lam)["principal"].certificate
    assert cert["lag"] == [1, -1] or tuple(cert["lag"]) == (1, -1)
    x = parse_kpath(cert["x"], lam) if isinstance(cert.get("x"), str) else None
    if x is not None:
        fam_lags = klag_search(lam, x, x, 2)
        assert (1, -1) in fam_lags


def test_product_shift_equivalence_is_componentwise():
    rng = random.Random(5)
    for e, f, lam, (x1, x2), (y1, y2) in product_pairs(rng, 40):
        x = product_path(lam, e, f, x1, x2)
        y = product_path(lam, e, f, y1, y2)
        l1, l2 = shift_equivalent(x1, y1, e), shift_equivalent(x2, y2, f)
        for n in itertools.product(range(-2, 3), repeat=2):
            want = n[0] in l1 and n[1] in l2
            assert (kshift_equivalent(lam, x, y, n) is not None) == want


@pytest.mark.parametrize("name", ["robertson", "omega_2_inf2", "parallel_rows"])
def test_kshift_matches_prefix(name):
    from ckgraph.classify import boundary_family

    lam = families.build(name)
    xs = boundary_family(lam)["inf"]
    assert xs
    for x in xs:
        d = kdegree(lam, x)
        for n in itertools.product(*(range(int(min(c, 1)) + 1) for c in d)):
            y = kshift(lam, x, n)
            assert kshift_equivalent(lam, x, y, n) is not None
            big = tuple(min(c + 2, dc) for c, dc in zip(n, d))
            rest = tuple(b - c for b, c in zip(big, n))
            assert kprefix(lam, y, rest).edges == lam.segment(kprefix(lam, x, big), n, big).edges


# -- Cuntz-Krieger families ------------------------------------------------------


def _scale(m):
    return [[2 * v for v in r] for r in m]


def _zero(m):
    return [[0] * len(r) for r in m]


def _extra_dim(fam, v):
    out = {}
    for k, m in fam.items():
        n = len(m)
        mm = [list(r) + [0] for r in m] + [[0] * (n + 1)]
        if k == v:
            mm[n][n] = 1
        out[k] = mm
    return out


def _permuted(fam, lam, e):
    # T_e U with U swapping two basis vectors under P_{s(e)}
    p = fam[lam.s(e)]
    n = len(p)
    sup = [i for i in range(n) if p[i][i]]
    if len(sup) < 2:
        return None
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    a, b = sup[:2]
    u[a][a] = u[b][b] = 0
    u[a][b] = u[b][a] = 1
    t = fam[e]
    return {**fam, e: [[sum(t[i][k] * u[k][j] for k in range(n)) for j in range(n)] for i in range(n)]}


CK_CASES = [
    omega(2, (1, 1)),
    omega(2, (2, 1)),
    omega(3, (1, 1, 1)),
    product_kgraph(DirectedGraph("abc", [("e", "a", "b"), ("f", "a", "c")]), DirectedGraph("abc", [("e", "a", "b"), ("f", "a", "c")])),
]
DIRECTED_CASES = [
    DirectedGraph("abc", [("e", "a", "b"), ("f", "a", "c"), ("g", "b", "c")]),
    DirectedGraph("abcd", [("e", "a", "b"), ("f", "a", "b"), ("g", "b", "c"), ("h", "b", "d")]),
]


@pytest.mark.parametrize("lam", CK_CASES, ids=lambda l: l.name)
def test_ck_mutations_kgraph(lam):
    fam = boundary_representation(lam)
    assert ck_verify(lam, fam).valid
    edges = sorted({e for v in lam.vertices for e in lam.edges_into(v)})
    for v in lam.vertices:
        assert "CK1" in ck_verify(lam, {**fam, v: _scale(fam[v])}).kinds()
        # the extra vector breaks covering at v and isometry of the edges out of v
        want = {"CK4"} if lam.edges_into(v) else set()
        if any(lam.s(e) == v for e in edges):
            want.add("CK3")
        assert ck_verify(lam, _extra_dim(fam, v)).kinds() == want
    for e in edges:
        assert "CK3" in ck_verify(lam, {**fam, e: _zero(fam[e])}).kinds()
        pm = _permuted(fam, lam, e)
        if pm is not None:
            assert ck_verify(lam, pm).kinds() & {"CK2", "CK3"}


@pytest.mark.parametrize("g", DIRECTED_CASES, ids=["tree", "parallel"])
def test_ck_mutations_directed(g):
    fam = boundary_representation(graph_as_kgraph(g))
    assert ck_verify(g, fam).valid
    for v in g.vertices:
        assert "projection" in ck_verify(g, {**fam, v: _scale(fam[v])}).kinds()
        want = {"CK(ii)"} if g.edges_into(v) else set()
        if g.edges_from(v):
            want.add("CK(i)")
        assert ck_verify(g, _extra_dim(fam, v)).kinds() == want
    for e in g.edge_ids:
        assert "CK(i)" in ck_verify(g, {**fam, e: _zero(fam[e])}).kinds()
        leak = [list(r) for r in fam[e]]
        r_sup = {i for i in range(len(leak)) if fam[g.r(e)][i][i]}
        i = min(set(range(len(leak))) - r_sup)
        leak[i][i] += 1
        assert "endpoints" in ck_verify(g, {**fam, e: leak}).kinds()


@pytest.mark.parametrize("name", ["robertson", "omega_2_inf2"])
def test_parse_kpath_round_trip(name):
    from ckgraph.classify import boundary_family

    lam = families.build(name)
    xs = boundary_family(lam)["inf"] + boundary_family(lam)["finite"]
    assert xs
    for x in xs:
        y = parse_kpath(str(x), lam)
        assert kdegree(lam, y) == kdegree(lam, x)
        assert kshift_equivalent(lam, x, y, (0, 0)) is not None
