import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ckgraph import families
from ckgraph.paths import (
    UP,
    FinitePath,
    LagSet,
    TailAnchored,
    boundary_member,
    brute_lags,
    enumerate_up,
    frequently_divertable,
    parse_path,
    segment,
    shift,
    shift_equivalent,
    vertex_at,
)
from strategies import finite_graphs


@st.composite
def up_triples(draw):
    g = draw(finite_graphs(max_vertices=4, max_edges=7, min_edges=1))
    ups = [x for v in sorted(g.vertices) for x in enumerate_up(g, v, 3)]
    assume(ups)
    pick = st.sampled_from(ups)
    return g, draw(pick), draw(pick), draw(pick)


def _span(*xs):
    return sum(len(x.head) + len(x.cycle) for x in xs) + 2


@settings(max_examples=200, deadline=None)
@given(up_triples())
def test_shift_equivalence_is_an_equivalence_relation(t):
    g, x, y, z = t
    assert 0 in shift_equivalent(x, x, g)
    lxy, lyx = shift_equivalent(x, y, g), shift_equivalent(y, x, g)
    assert bool(lxy) == bool(lyx)
    if lxy:
        assert -lxy.some() in lyx
    lyz = shift_equivalent(y, z, g)
    if lxy and lyz:
        assert lxy.some() + lyz.some() in shift_equivalent(x, z, g)
        assert (lxy + lyz).some() in shift_equivalent(x, z, g)


@settings(max_examples=200, deadline=None)
@given(up_triples())
def test_lag_sets_match_brute_force(t):
    g, x, y, _ = t
    span = _span(x, y)
    got = {n for n in range(-span, span + 1) if n in shift_equivalent(x, y, g)}
    assert got == brute_lags(x, y, 6 * span, span)


@settings(max_examples=200, deadline=None)
@given(up_triples(), st.integers(0, 9))
def test_shift_is_lag_n_and_matches_segments(t, n):
    g, x, _, _ = t
    y = shift(x, n, g)
    assert n in shift_equivalent(x, y, g)
    assert segment(y, 0, 5, g).edges == segment(x, n, n + 5, g).edges
    assert vertex_at(y, 0, g) == vertex_at(x, n, g)


def test_up_normal_form():
    g = families.loop_plus_edge()
    assert UP(("g", "g"), ("g",), graph=g) == UP((), ("g",), graph=g)
    assert UP((), ("g", "g"), graph=g).cycle == ("g",)


def test_finite_paths_equivalent_by_source():
    g = families.loop_plus_edge()
    a = FinitePath(("f",), graph=g)
    b = FinitePath(("g", "g", "f"), graph=g)
    assert shift_equivalent(b, a, g) == LagSet.single(2)
    assert not shift_equivalent(a, UP((), ("g",), graph=g), g)
    assert boundary_member(g, a)
    assert not boundary_member(g, FinitePath((), "u", graph=g))


def test_lag_set_arithmetic():
    a, b = LagSet.progression(1, 4), LagSet.progression(2, 6)
    s = a + b
    assert s.modulus == 2 and 3 in s and 5 in s and 4 not in s
    assert -LagSet.single(3) == LagSet.single(-3)
    assert not LagSet.none() + a
    assert LagSet.progression(-1, 4).offset == 3


def _tail_paths(g):
    out = [families.rail_path(g, "v", c) for c in (1, 2, 3)]
    out += [families.diverted(g, "v", n, (f"f{i}_{n}",), "w") for n in (2, 3, 4) for i in (1, 2)]
    return out


def test_tail_anchored_lags_match_brute_force():
    g = families.two_times()
    ps = _tail_paths(g)
    for x in ps:
        for y in ps:
            span = 8
            got = {n for n in range(-span, span + 1) if n in shift_equivalent(x, y, g)}
            assert got == brute_lags(x, y, 40, span), (str(x), str(y))


def test_tail_anchored_normal_form_absorbs_line_edges():
    g = families.two_times()
    z = families.rail_path(g, "v", 1)
    head = z.prefix(3)
    assert TailAnchored(head, "v_4", "rail", graph=g) == z
    assert shift(z, 3, g) == families.rail_path(g, "v", 4)


def test_frequent_divertability():
    g = families.two_times()
    z = families.rail_path(g, "v", 1)
    x = families.diverted(g, "v", 2, ("f1_2",), "w")
    # every vertex of the rail reaches later diversions, nothing reaches back onto the rail
    assert frequently_divertable(g, z, z).value == "Yes"
    assert frequently_divertable(g, x, z).value == "No"


@pytest.mark.parametrize(
    "text",
    ["f", "@v", "g g f", "; g", "g ; g"],
)
def test_parse_path_round_trip(text):
    g = families.loop_plus_edge()
    p = parse_path(text, g)
    assert parse_path(str(p), g) == p


def test_parse_path_rejects_broken_paths():
    g = families.loop_plus_edge()
    with pytest.raises(ValueError):
        parse_path("f g", g)
