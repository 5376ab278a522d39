"""Command-line interface.

Exit codes: 0 when the report is decided, 2 when Unknown verdicts (or
uncertified results) dominate, 1 on input errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import families
from .classify import classify_digraph, classify_kgraph
from .desourcify import materialize_truncation
from .digraph import ColumnTemplate, DirectedGraph, validate
from .groupoid import k_times_witness_check, multiplicity_profile
from .kgraph import KGraph, boundary_member, klag_search, le_infty_member, omega, parse_kpath, validate_kgraph
from .paths import boundary_member as path_boundary_member
from .paths import frequently_divertable, parse_path, shift_equivalent
from .verdict import UNKNOWN, jsonable

DEFAULTS = {"depth": 64, "scope": 2, "window": 64, "cylinders": 8}


class InputError(Exception):
    pass


def budgets_from_env() -> dict:
    """Defaults, overridden by ``CKGRAPH_BUDGET`` (``N`` for every budget, or ``key=N,...``)."""
    out = dict(DEFAULTS)
    raw = os.environ.get("CKGRAPH_BUDGET", "").strip()
    if not raw:
        return out
    try:
        if "=" not in raw:
            n = int(raw)
            return {k: n for k in out}
        for item in raw.split(","):
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in out:
                raise InputError(f"CKGRAPH_BUDGET: unknown budget {key!r}")
            out[key] = int(val)
    except ValueError:
        raise InputError(f"CKGRAPH_BUDGET: cannot parse {raw!r}") from None
    return out


def load_graph(ref: str):
    """Load a graph document from a path, falling back to the shipped fixture of the same name."""
    p = Path(ref)
    if p.is_file():
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise InputError(f"{ref}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    else:
        try:
            doc = families.fixture_document(p.stem)
        except KeyError:
            raise InputError(f"{ref}: no such file or built-in fixture") from None
    if not isinstance(doc, dict):
        raise InputError(f"{ref}: expected a JSON object at the top level")
    try:
        return families.load_document(doc)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{ref}: {e}") from None


def _ints(text: str, flag: str) -> tuple:
    try:
        return tuple("inf" if t.strip() in ("inf", "∞") else int(t) for t in text.split(","))
    except ValueError:
        raise InputError(f"{flag}: expected comma-separated integers, got {text!r}") from None


# -- commands -------------------------------------------------------------------


def cmd_classify(args, budgets) -> tuple[dict, int]:
    g = load_graph(args.file)
    if isinstance(g, KGraph):
        rep = classify_kgraph(g, scope=budgets["scope"], budget=budgets["depth"])
    else:
        bad = validate(g) if isinstance(g, DirectedGraph) else None
        if bad is not None and not bad.valid:
            raise InputError(f"{args.file}: invalid graph: {bad.to_dict()['problems']}")
        rep = classify_digraph(g, budget=budgets["depth"])
    doc = rep.to_dict()
    doc["_meta"] = {"input": Path(args.file).name, "budgets": budgets}
    unknown = rep.unknown_count
    return doc, 2 if unknown * 2 > len(rep.verdicts) else 0


def cmd_paths(args, budgets) -> tuple[dict, int]:
    g = load_graph(args.file)
    out: dict = {}
    undecided = False
    try:
        if isinstance(g, KGraph):
            x = parse_kpath(args.x, g)
            b = boundary_member(g, x)
            out["x"] = {"path": str(x), "boundary": b.to_dict(), "le_infty": le_infty_member(g, x)}
            undecided |= b.value == UNKNOWN
            if args.y:
                y = parse_kpath(args.y, g)
                out["y"] = {"path": str(y)}
                out["lags"] = [list(n) for n in klag_search(g, x, y, budgets["scope"])]
        else:
            x = parse_path(args.x, g)
            out["x"] = {"path": str(x), "boundary": path_boundary_member(g, x)}
            if args.y:
                y = parse_path(args.y, g)
                out["y"] = {"path": str(y)}
                out["lags"] = shift_equivalent(x, y, g).to_dict()
                fd = frequently_divertable(g, x, y, budgets["depth"])
                out["frequently_divertable"] = fd.to_dict()
                undecided |= fd.value == UNKNOWN
    except (KeyError, ValueError, IndexError) as e:
        raise InputError(f"path: {e}") from None
    out["_meta"] = {"input": Path(args.file).name, "budgets": budgets}
    return jsonable(out), 2 if undecided else 0


def cmd_kgraph_validate(args, budgets) -> tuple[dict, int]:
    if args.file == "omega":
        if not args.m:
            raise InputError("omega needs --m")
        m = _ints(args.m, "--m")
        try:
            lam = omega(len(m), m)
        except ValueError as e:
            raise InputError(str(e)) from None
        name = f"omega {args.m}"
    else:
        lam = load_graph(args.file)
        if not isinstance(lam, KGraph):
            raise InputError(f"{args.file}: not a k-graph document")
        name = Path(args.file).name
    f = validate_kgraph(lam)
    doc = {"result": "valid" if f.valid else "invalid", **f.to_dict(), "_meta": {"input": name}}
    return doc, 0 if f.valid else 1


def cmd_desourcify(args, budgets) -> tuple[dict, int]:
    lam = load_graph(args.file)
    if isinstance(lam, DirectedGraph):
        from .kgraph import graph_as_kgraph

        lam = graph_as_kgraph(lam)
    if not isinstance(lam, KGraph):
        raise InputError(f"{args.file}: not a k-graph document")
    bound = _ints(args.truncate, "--truncate")
    if len(bound) != lam.k or any(not isinstance(b, int) or b < 0 for b in bound):
        raise InputError(f"--truncate: expected {lam.k} non-negative integers")
    cols = None
    if args.columns:
        a, _, b = args.columns.partition(":")
        try:
            cols = range(int(a), int(b) + 1)
        except ValueError:
            raise InputError("--columns: expected a:b") from None
    tr = materialize_truncation(lam, bound, cols)
    doc = tr.to_dict()
    doc["interior_missing_colors"] = tr.sourceless_interior()
    doc["missing_representatives"] = tr.missing
    if lam.periodic:
        doc["column_counts"] = {str(c): {"vertices": v, "edges": e} for c, (v, e) in tr.column_counts().items()}
    doc["_meta"] = {"input": Path(args.file).name, "truncate": list(bound)}
    return doc, 2 if tr.missing else 0


def _family(family_id: str):
    try:
        return families.sequence_family(family_id)
    except KeyError:
        raise InputError(f"unknown family {family_id!r}; known: {', '.join(families.SEQUENCE_FAMILIES)}") from None


def cmd_profile(args, budgets) -> tuple[dict, int]:
    fam = _family(args.family)
    prof = multiplicity_profile(fam, range(0, budgets["cylinders"]), range(fam.start, fam.start + budgets["window"]))
    prof["_meta"] = {"budgets": {k: budgets[k] for k in ("cylinders", "window")}}
    return prof, 0 if prof["certified"] else 2


def cmd_witness(args, budgets) -> tuple[dict, int]:
    fam = _family(args.family)
    limits = [args.limit] if args.limit else list(fam.limits)
    out = {}
    code = 0
    for lim in limits:
        if lim not in fam.limits:
            raise InputError(f"--limit: family has limits {sorted(fam.limits)}")
        ws = fam.limits[lim][1]
        if args.duplicate:
            ws = [ws[0], ws[0]]
        r = k_times_witness_check(
            fam, lim, ws, window=range(fam.start, fam.start + budgets["window"]), cylinders=budgets["cylinders"]
        )
        out[lim] = r
        if r["passed"] and not r["certified"]:
            code = 2
    out["_meta"] = {"budgets": {k: budgets[k] for k in ("cylinders", "window")}}
    return out, code


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    d = DEFAULTS
    p = argparse.ArgumentParser(
        prog="ckgraph",
        description="Classification properties of directed graphs and k-graphs.",
        epilog="Budgets can also be set through CKGRAPH_BUDGET, e.g. CKGRAPH_BUDGET=depth=32,window=16.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *names):
        sp.add_argument("--out", help="write the report here instead of stdout")
        helps = {
            "depth": f"column budget for infinite graphs (default {d['depth']})",
            "scope": f"degree bound for representable k-graph paths (default {d['scope']})",
            "window": f"number of sequence indices examined (default {d['window']})",
            "cylinders": f"number of cylinder depths examined (default {d['cylinders']})",
        }
        for n in names:
            sp.add_argument(f"--{n}", type=int, default=None, help=helps[n])

    sp = sub.add_parser("classify", help="all eight classification verdicts")
    sp.add_argument("file")
    common(sp, "depth", "scope")
    sp = sub.add_parser("paths", help="boundary membership and shift equivalence of paths")
    sp.add_argument("file")
    sp.add_argument("--x", required=True, help="a path literal, e.g. 'e1 e2 ; c1 c2'")
    sp.add_argument("--y", help="a second path literal")
    common(sp, "depth", "scope")
    sp = sub.add_parser("kgraph-validate", help="factorization checks for a k-graph document or 'omega'")
    sp.add_argument("file", help="a k-graph document, or 'omega' together with --m")
    sp.add_argument("--m", help="comma-separated degree for omega, e.g. 3,2 or inf,2")
    common(sp)
    sp = sub.add_parser("desourcify", help="a finite window of the source-free k-graph and the embedding table")
    sp.add_argument("file")
    sp.add_argument("--truncate", required=True, help="comma-separated degree bound, e.g. 3,3")
    sp.add_argument("--columns", help="root columns a:b for periodic inputs")
    common(sp)
    sp = sub.add_parser("groupoid-profile", help="lower and upper multiplicities of a sequence family")
    sp.add_argument("--family", required=True, help="thesis:2times, thesis:ktimes:<k>, thesis:ml2mu3, thesis:nonhausdorff")
    common(sp, "cylinders", "window")
    sp = sub.add_parser("witness-check", help="k-times convergence conditions for a family's witnesses")
    sp.add_argument("--family", required=True)
    sp.add_argument("--limit", help="which limit path to check (default: all)")
    sp.add_argument("--duplicate", action="store_true", help="use the first witness twice")
    common(sp, "cylinders", "window")
    return p


COMMANDS = {
    "classify": cmd_classify,
    "paths": cmd_paths,
    "kgraph-validate": cmd_kgraph_validate,
    "desourcify": cmd_desourcify,
    "groupoid-profile": cmd_profile,
    "witness-check": cmd_witness,
}


def run(argv: list[str] | None = None) -> tuple[int, dict | None]:
    """Run a command; returns the exit code and the report document."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (1 if e.code else 0), None
    try:
        budgets = budgets_from_env()
        for k in DEFAULTS:
            v = getattr(args, k, None)
            if v is not None:
                if v < 0:
                    raise InputError(f"--{k} must be non-negative")
                budgets[k] = v
        doc, code = COMMANDS[args.command](args, budgets)
    except InputError as e:
        print(f"ckgraph: error: {e}", file=sys.stderr)
        return 1, None
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return code, doc


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
