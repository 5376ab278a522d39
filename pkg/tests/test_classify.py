import random

import pytest
from hypothesis import given, settings

from ckgraph import families
from ckgraph.classify import (
    CHAIN,
    PROPERTIES,
    _classify_finite_acyclic,
    boundary_family,
    chain_consistent,
    classify_digraph,
    classify_kgraph,
    monolithic_extension,
    propagate,
)
from ckgraph.digraph import Cycle, DirectedGraph, cycle_entries
from ckgraph.kgraph import graph_as_kgraph, kshift_equivalent
from ckgraph.paths import FinitePath, shift
from ckgraph.verdict import no, unknown, yes
from oracles import literal_liminal, literal_postliminal, random_graph
from strategies import finite_graphs


def verdicts(rep):
    return {p: rep[p].value for p in PROPERTIES}


# -- named examples ---------------------------------------------------------------


def test_loop_plus_edge():
    rep = classify_digraph(families.loop_plus_edge())
    assert rep["liminal"].value == "No"
    cert = rep["liminal"].certificate
    g = families.loop_plus_edge()
    assert cert["entry"] in cycle_entries(g, Cycle(tuple(cert["cycle"])))
    assert rep["postliminal"].value == "Yes"


def test_two_row_and_alternating():
    two = classify_digraph(families.two_row())
    assert two["liminal"].value == "No" and two["postliminal"].value == "Yes"
    assert classify_digraph(families.alternating())["postliminal"].value == "No"


def test_two_times():
    rep = classify_digraph(families.two_times())
    assert rep["bounded_trace"].value == "Yes"
    assert rep["bounded_trace"].certificate["M"] == 2
    assert rep["fell"].value == "No"
    assert rep["continuous_trace"].value == "No"
    assert rep["liminal"].value == "Yes"


def test_omega_and_cts_examples():
    assert all(v == "Yes" for v in verdicts(classify_kgraph(families.omega_2_32())).values())
    for name in ["omega_2_inf2", "corner", "robertson"]:
        rep = classify_kgraph(families.build(name))
        assert rep["continuous_trace"].value == "Yes", name
        assert chain_consistent(rep)


def test_parallel_rows_self_lag_certificate():
    lam = families.parallel_rows()
    rep = classify_kgraph(lam)
    cert = rep["principal"].certificate
    assert rep["principal"].value == "No"
    assert cert["lag"] == [1, -1]
    x = boundary_family(lam)["inf"]
    assert any(kshift_equivalent(lam, p, p, (1, -1)) for p in x)


# -- oracle agreement ---------------------------------------------------------------


def test_liminal_postliminal_agree_with_path_space_oracle():
    rng = random.Random(20240601)
    mismatches = []
    for _ in range(600):
        g = random_graph(rng)
        rep = classify_digraph(g)
        got = (rep["liminal"].value == "Yes", rep["postliminal"].value == "Yes")
        want = (literal_liminal(g), literal_postliminal(g))
        if got != want:
            mismatches.append(g.to_dict())
    assert mismatches == []


@settings(max_examples=80, deadline=None)
@given(finite_graphs())
def test_oracle_agreement_hypothesis(g):
    rep = classify_digraph(g)
    assert (rep["liminal"].value == "Yes") == literal_liminal(g)
    assert (rep["postliminal"].value == "Yes") == literal_postliminal(g)


# -- chain and certificates ----------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(finite_graphs())
def test_implication_chain_never_violated(g):
    rep = classify_digraph(g)
    assert chain_consistent(rep)
    order = [rep[p].value for p in CHAIN]
    # once a weaker property is No every stronger one is No
    for i, val in enumerate(order):
        if val == "No":
            assert all(s == "No" for s in order[:i])


@pytest.mark.parametrize("name", ["two_row", "alternating", "two_times", "ml2mu3", "nonhausdorff"])
def test_chain_on_templates(name):
    rep = classify_digraph(families.build(name))
    assert chain_consistent(rep)
    assert rep.unknown_count == 0


@settings(max_examples=200, deadline=None)
@given(finite_graphs())
def test_certificates_are_checkable(g):
    rep = classify_digraph(g)
    for p in ("liminal", "postliminal"):
        c = rep[p].certificate
        if rep[p].value == "No" and c["kind"] != "implied":
            cyc = Cycle(tuple(c["cycle"]))
            assert cyc.is_valid(g)
            assert c["entry"] in cycle_entries(g, cyc)
            if p == "postliminal":
                assert c["entry"] in c["entry_cycle"]
                assert Cycle(tuple(c["entry_cycle"])).is_valid(g)
    if rep["principal"].value == "No":
        assert Cycle(tuple(rep["principal"].certificate["cycle"])).is_valid(g)


def test_propagate_fills_both_directions():
    v = {p: unknown("x") for p in PROPERTIES}
    v["fell"] = yes()
    v["postliminal"] = unknown("x")
    out = propagate(v)
    assert out["liminal"].value == "Yes" and out["liminal"].certificate == {"kind": "implied", "by": "fell"}
    assert out["continuous_trace"].value == "Unknown"
    v = {p: unknown("x") for p in PROPERTIES}
    v["liminal"] = no({"kind": "witness"})
    out = propagate(v)
    assert out["continuous_trace"].value == "No"
    assert out["fell"].certificate["by"] == "liminal"
    assert out["postliminal"].value == "Unknown"


def test_propagate_rejects_contradictions():
    v = {p: unknown("x") for p in PROPERTIES}
    v["fell"], v["liminal"] = yes(), no({"kind": "w"})
    with pytest.raises(AssertionError):
        propagate(v)


@settings(max_examples=200, deadline=None)
@given(finite_graphs())
def test_kgraph_engine_matches_digraph_on_acyclic_graphs(g):
    # orient every edge from lower to higher vertex index so the graph is acyclic
    order = sorted(g.vertices)
    edges = [(e.id, *sorted((e.r, e.s), key=order.index)) for e in g.edges if e.r != e.s]
    h = DirectedGraph(order, edges)
    assert verdicts(_classify_finite_acyclic(graph_as_kgraph(h))) == verdicts(classify_digraph(h))
    assert verdicts(classify_kgraph(graph_as_kgraph(h))) == verdicts(classify_digraph(h))


def test_monolithic_extension():
    g = families.two_times()
    a, b = classify_digraph(g)["fell"].certificate["pair"]
    n = int(a.split("_")[1])
    x = families.diverted(g, "v", n, (a,), "w")
    y = families.diverted(g, "v", n, (b,), "w")
    eta, zeta = FinitePath(x.head, graph=g), FinitePath(y.head, graph=g)
    t = monolithic_extension((x, y), (eta, zeta), g)
    assert t is not None and shift(x, len(eta), g) == t == shift(y, len(zeta), g)
    # prefixes ending at different vertices have no common suffix
    assert monolithic_extension((x, y), (eta, FinitePath(y.head[:-1], graph=g)), g) is None
