"""Built-in example graphs, k-graphs and sequence families.

Every named graph is available both as a builder here and as a JSON document
under ``ckgraph/fixtures`` (the documents are generated from the builders and
a test keeps the two in step).
"""
from __future__ import annotations

import json
from importlib import resources

from .digraph import ColumnTemplate, DirectedGraph, Edge, Hair, Template, vname
from .kgraph import KGraph, KInf, omega
from .paths import FinitePath, TailAnchored


# -- directed graphs ---------------------------------------------------------


def loop_plus_edge() -> DirectedGraph:
    """A loop ``g`` at ``u`` and an edge ``f`` from the source ``v`` into ``u``."""
    return DirectedGraph(["u", "v"], [Edge("g", "u", "u"), Edge("f", "u", "v")])


def loop_with_exit() -> DirectedGraph:
    """A loop ``g`` at ``u`` and an edge ``e`` with range ``v`` and source ``u``."""
    return DirectedGraph(["u", "v"], [Edge("g", "u", "u"), Edge("e", "v", "u")])


def two_row() -> ColumnTemplate:
    """Rails along ``v`` and ``u`` with ``f_n: v_n <- u_n``."""
    return ColumnTemplate(
        ["v", "u"],
        [Template("x", "v", 0, "v", 1), Template("y", "u", 0, "u", 1), Template("f", "v", 0, "u", 0)],
        name="two_row",
    )


def alternating() -> ColumnTemplate:
    """Rails along ``v`` and ``u``; ``v_n <- u_n`` at even ``n`` and ``u_n <- v_n`` at odd ``n``."""
    return ColumnTemplate(
        ["v", "u"],
        [
            Template("x", "v", 0, "v", 1),
            Template("y", "u", 0, "u", 1),
            Template("f", "v", 0, "u", 0, period=2, phase=0),
            Template("g", "u", 0, "v", 0, period=2, phase=1),
        ],
        name="alternating",
    )


def k_times(k: int) -> ColumnTemplate:
    """A rail ``v_1 <- v_2 <- ...`` with ``k`` edges ``v_n <- w_n`` and a hair below each ``w_n``."""
    if k < 1:
        raise ValueError("k must be positive")
    tpls = [Template("x", "v", 0, "v", 1)] + [Template(f"f{i}", "v", 0, "w", 0) for i in range(1, k + 1)]
    return ColumnTemplate(["v", "w"], tpls, [Hair("w")], origin=1, name=f"ktimes_{k}")


def two_times() -> ColumnTemplate:
    g = k_times(2)
    g.name = "two_times"
    return g


def ml2mu3() -> ColumnTemplate:
    """Two edges ``v_n <- w_n`` at odd columns and three at even ones."""
    tpls = [
        Template("x", "v", 0, "v", 1),
        Template("f1", "v", 0, "w", 0),
        Template("f2", "v", 0, "w", 0),
        Template("f3", "v", 0, "w", 0, period=2, phase=0),
    ]
    return ColumnTemplate(["v", "w"], tpls, [Hair("w")], origin=1, name="ml2mu3")


def nonhausdorff() -> ColumnTemplate:
    """Rails ``v`` and ``w`` both fed by ``u_n``, which receives two edges from the hair vertex ``a_n``."""
    tpls = [
        Template("x", "v", 0, "v", 1),
        Template("y", "w", 0, "w", 1),
        Template("g", "v", 0, "u", 0),
        Template("h", "w", 0, "u", 0),
        Template("f1", "u", 0, "a", 0),
        Template("f2", "u", 0, "a", 0),
    ]
    return ColumnTemplate(["v", "w", "u", "a"], tpls, [Hair("a")], origin=1, name="nonhausdorff")


# -- k-graphs ---------------------------------------------------------------


def corner() -> KGraph:
    """Two edges of different colors into ``v`` from the sources ``a`` and ``b``."""
    g = DirectedGraph(["v", "a", "b"], [Edge("e", "v", "a"), Edge("f", "v", "b")])
    return KGraph(2, g, {"e": 1, "f": 2}, [], name="corner")


def parallel_rows() -> KGraph:
    """One row of vertices joined by a solid (color 1) and a dashed (color 2) edge in each step."""
    ct = ColumnTemplate(
        ["v"], [Template("s", "v", 0, "v", 1, color=1), Template("d", "v", 0, "v", 1, color=2)], name="parallel_rows"
    )
    return KGraph(2, ct, square_templates=[((("s", 0), ("d", 1)), (("d", 0), ("s", 1)))], name="parallel_rows")


def robertson() -> KGraph:
    """Rows ``v`` and ``w`` joined by dashed edges, with a solid edge from the source ``a_n`` into ``v_n``.

    ``x_n: v_n <- v_{n+1}``, ``t_n: w_n <- w_{n+1}`` and ``f_n: v_n <- a_n`` are
    solid; ``d_n: v_n <- w_n`` is dashed; squares ``x_n d_{n+1} = d_n t_n``.
    """
    ct = ColumnTemplate(
        ["v", "w", "a"],
        [
            Template("x", "v", 0, "v", 1, color=1),
            Template("t", "w", 0, "w", 1, color=1),
            Template("f", "v", 0, "a", 0, color=1),
            Template("d", "v", 0, "w", 0, color=2),
        ],
        name="robertson",
    )
    return KGraph(2, ct, square_templates=[((("x", 0), ("d", 1)), (("d", 0), ("t", 0)))], name="robertson")


def robertson_x(lam: KGraph | None = None) -> KInf:
    """The bottom-row path ``x_0 x_1 x_2 ...`` from ``v_0``."""
    lam = lam or robertson()
    return KInf(FinitePath((), "v_0", graph=lam), FinitePath(("x_0",), graph=lam), 1, graph=lam)


def omega_2_32() -> KGraph:
    return omega(2, (3, 2))


def omega_2_inf2() -> KGraph:
    return omega(2, ("inf", 2))


# -- registry -----------------------------------------------------------------

DIGRAPHS = {
    "loop_plus_edge": loop_plus_edge,
    "loop_with_exit": loop_with_exit,
    "two_row": two_row,
    "alternating": alternating,
    "two_times": two_times,
    "ml2mu3": ml2mu3,
    "nonhausdorff": nonhausdorff,
}

KGRAPHS = {
    "omega_2_32": omega_2_32,
    "omega_2_inf2": omega_2_inf2,
    "corner": corner,
    "parallel_rows": parallel_rows,
    "robertson": robertson,
}


def fixture_names() -> list[str]:
    return sorted(DIGRAPHS) + sorted(KGRAPHS)


def fixture_document(name: str) -> dict:
    """The shipped JSON document for a named fixture."""
    res = resources.files("ckgraph") / "fixtures" / f"{name}.json"
    if not res.is_file():
        raise KeyError(name)
    return json.loads(res.read_text())


def build(name: str):
    if name in DIGRAPHS:
        return DIGRAPHS[name]()
    if name in KGRAPHS:
        return KGRAPHS[name]()
    raise KeyError(name)


def load_document(doc: dict):
    """Parse any supported graph document."""
    from .kgraph import KGraph

    if "k" in doc:
        return KGraph.from_dict(doc)
    if "tracks" in doc:
        return ColumnTemplate.from_dict(doc)
    return DirectedGraph.from_dict(doc)


def write_fixtures(directory) -> None:
    """Regenerate the JSON fixtures from the builders."""
    from pathlib import Path

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name in fixture_names():
        (d / f"{name}.json").write_text(json.dumps(build(name).to_dict(), indent=1, sort_keys=True) + "\n")


# -- sequence families ----------------------------------------------------------


def rail_path(g: ColumnTemplate, track: str, start: int) -> TailAnchored:
    return TailAnchored((), vname(track, start), "rail", graph=g)


def diverted(g: ColumnTemplate, rail: str, n: int, via: tuple[str, ...], hair_track: str) -> TailAnchored:
    """Follow ``rail`` from column 1 to column ``n``, then the edges ``via``, then the hair at ``hair_track``."""
    head = tuple(f"{g.rails[rail].id}_{c}" for c in range(1, n)) + via
    return TailAnchored(head, vname(hair_track, n), "hair", graph=g)


def _diversion_family(name: str, g: ColumnTemplate, k: int, period: int = 1):
    from .groupoid import GroupoidElement, SequenceFamily

    def member(n: int) -> TailAnchored:
        return diverted(g, "v", n, ("f1_%d" % n,), "w")

    def witness(i: int):
        return lambda n: GroupoidElement(diverted(g, "v", n, (f"f{i}_{n}",), "w"), 0, member(n), g)

    z = rail_path(g, "v", 1)
    return SequenceFamily(name, g, member, {"z": (z, [witness(i) for i in range(1, k + 1)])}, period=period)


def nonhausdorff_family():
    """``x(n)`` runs along ``v`` to ``v_n``, then ``g_n f1_n`` and down the hair at ``a_n``.

    It converges twice to the ``v`` rail and twice to the ``w`` rail.
    """
    from .groupoid import GroupoidElement, SequenceFamily

    g = nonhausdorff()

    def member(n: int) -> TailAnchored:
        return diverted(g, "v", n, (f"g_{n}", f"f1_{n}"), "a")

    def witness(rail: str, via: str, i: int):
        return lambda n: GroupoidElement(diverted(g, rail, n, (f"{via}_{n}", f"f{i}_{n}"), "a"), 0, member(n), g)

    limits = {
        "x": (rail_path(g, "v", 1), [witness("v", "g", 1), witness("v", "g", 2)]),
        "y": (rail_path(g, "w", 1), [witness("w", "h", 1), witness("w", "h", 2)]),
    }
    return SequenceFamily("thesis:nonhausdorff", g, member, limits)


def sequence_family(family_id: str):
    """Resolve ``thesis:2times``, ``thesis:ktimes:<k>``, ``thesis:ml2mu3`` or ``thesis:nonhausdorff``."""
    parts = family_id.split(":")
    if len(parts) < 2 or parts[0] != "thesis":
        raise KeyError(family_id)
    kind = parts[1]
    if kind == "2times" and len(parts) == 2:
        return _diversion_family(family_id, two_times(), 2)
    if kind == "ktimes" and len(parts) == 3:
        try:
            k = int(parts[2])
        except ValueError:
            raise KeyError(family_id) from None
        if k < 1:
            raise KeyError(family_id)
        return _diversion_family(family_id, k_times(k), k)
    if kind == "ml2mu3" and len(parts) == 2:
        return _diversion_family(family_id, ml2mu3(), 2, period=2)
    if kind == "nonhausdorff" and len(parts) == 2:
        return nonhausdorff_family()
    raise KeyError(family_id)


SEQUENCE_FAMILIES = ("thesis:2times", "thesis:ktimes:<k>", "thesis:ml2mu3", "thesis:nonhausdorff")
