import json
import subprocess
import sys

import pytest

from ckgraph import families
from ckgraph.cli import DEFAULTS, build_parser, run
from ckgraph.classify import PROPERTIES


def test_classify_named_fixture(capsys):
    code, doc = run(["classify", "examples/loop_plus_edge.json"])
    assert code == 0
    assert doc["liminal"]["verdict"] == "No"
    assert doc["liminal"]["certificate"]["kind"] == "cycle_entry"
    assert set(PROPERTIES) <= set(doc)
    assert doc["_meta"]["budgets"] == DEFAULTS
    assert json.loads(capsys.readouterr().out) == doc


def test_classify_file_and_out(tmp_path):
    src = tmp_path / "g.json"
    src.write_text(json.dumps(families.two_row().to_dict()))
    out = tmp_path / "report.json"
    code, doc = run(["classify", str(src), "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text()) == doc
    assert doc["liminal"]["verdict"] == "No" and doc["postliminal"]["verdict"] == "Yes"


def test_unknown_dominated_report_exits_2(tmp_path):
    doc = {
        "tracks": ["a", "b"],
        "templates": [
            {"id": "p", "r": {"track": "a", "offset": 0}, "s": {"track": "b", "offset": 0}},
            {"id": "q", "r": {"track": "b", "offset": 0}, "s": {"track": "a", "offset": 0}},
        ],
    }
    src = tmp_path / "loop.json"
    src.write_text(json.dumps(doc))
    code, rep = run(["classify", str(src)])
    assert code == 2
    assert all(rep[p]["verdict"] == "Unknown" for p in PROPERTIES)


def test_input_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": ["a"],\n "edges": [}')
    assert run(["classify", str(bad)])[0] == 1
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err
    assert run(["classify", str(tmp_path / "nothing.json")])[0] == 1
    missing = tmp_path / "m.json"
    missing.write_text('{"vertices": ["a"], "edges": [{"id": "e", "r": "a"}]}')
    assert run(["classify", str(missing)])[0] == 1
    assert "'s'" in capsys.readouterr().err
    assert run(["classify"])[0] == 1
    assert run(["classify", "loop_plus_edge", "--depth", "-3"])[0] == 1


def test_kgraph_validate():
    code, doc = run(["kgraph-validate", "omega", "--m", "3,2"])
    assert code == 0 and doc["result"] == "valid"
    assert run(["kgraph-validate", "omega", "--m", "inf,2"])[0] == 0
    assert run(["kgraph-validate", "omega"])[0] == 1


def test_kgraph_validate_invalid_document(tmp_path):
    from ckgraph.kgraph import omega

    d = omega(2, (1, 1)).to_dict()
    d["squares"] = d["squares"][1:]
    src = tmp_path / "broken.json"
    src.write_text(json.dumps(d))
    code, doc = run(["kgraph-validate", str(src)])
    assert code == 1 and doc["result"] == "invalid"
    assert any(p["kind"] == "missing_square" for p in doc["problems"])


def test_groupoid_profile_defaults_and_flags():
    code, doc = run(["groupoid-profile", "--family", "thesis:ml2mu3", "--cylinders", "8", "--window", "64"])
    assert code == 0
    assert (doc["M_L"], doc["M_U"], doc["certified"]) == (2, 3, True)
    code, doc = run(["groupoid-profile", "--family", "thesis:2times"])
    assert code == 0 and (doc["M_L"], doc["M_U"]) == (2, 2)
    assert run(["groupoid-profile", "--family", "thesis:bogus"])[0] == 1


def test_short_window_profile_exits_2():
    code, doc = run(["groupoid-profile", "--family", "thesis:ml2mu3", "--window", "2"])
    assert code == 2 and not doc["certified"]


def test_witness_check():
    code, doc = run(["witness-check", "--family", "thesis:nonhausdorff"])
    assert code == 0
    assert doc["x"]["certified"] and doc["y"]["certified"]
    code, doc = run(["witness-check", "--family", "thesis:2times", "--duplicate"])
    assert not doc["z"]["passed"] and not doc["z"]["conditions"]["iii"]["ok"]
    assert run(["witness-check", "--family", "thesis:2times", "--limit", "q"])[0] == 1


def test_desourcify_command():
    code, doc = run(["desourcify", "robertson", "--truncate", "3,3", "--columns", "0:3"])
    assert code == 0
    for c in "0123":
        assert doc["column_counts"][c] == {"vertices": 24, "edges": 43}
    assert doc["interior_missing_colors"] == []
    assert run(["desourcify", "robertson", "--truncate", "3"])[0] == 1
    assert run(["desourcify", "robertson", "--truncate", "3,3", "--columns", "x"])[0] == 1


def test_paths_command():
    code, doc = run(["paths", "loop_plus_edge", "--x", "g f", "--y", "f"])
    assert code == 0
    assert doc["x"]["boundary"] is True
    assert doc["lags"] == {"lags": [1]}
    assert run(["paths", "loop_plus_edge", "--x", "f g"])[0] == 1
    x = str(families.robertson_x())
    code, doc = run(["paths", "robertson", "--x", x, "--y", x])
    assert code == 0
    assert doc["x"]["boundary"]["verdict"] == "Yes" and doc["x"]["le_infty"] is False
    assert [0, 0] in doc["lags"]


def test_budget_environment(monkeypatch):
    monkeypatch.setenv("CKGRAPH_BUDGET", "depth=32,window=16")
    code, doc = run(["classify", "loop_plus_edge"])
    assert doc["_meta"]["budgets"]["depth"] == 32 and doc["_meta"]["budgets"]["window"] == 16
    # flags override the environment
    code, doc = run(["classify", "loop_plus_edge", "--depth", "40"])
    assert doc["_meta"]["budgets"]["depth"] == 40
    monkeypatch.setenv("CKGRAPH_BUDGET", "7")
    assert run(["classify", "loop_plus_edge"])[1]["_meta"]["budgets"] == {k: 7 for k in DEFAULTS}
    monkeypatch.setenv("CKGRAPH_BUDGET", "speed=3")
    assert run(["classify", "loop_plus_edge"])[0] == 1
    monkeypatch.setenv("CKGRAPH_BUDGET", "depth=lots")
    assert run(["classify", "loop_plus_edge"])[0] == 1


def test_help_lists_defaults():
    p = build_parser()
    sub = p._subparsers._group_actions[0].choices
    text = sub["classify"].format_help() + sub["groupoid-profile"].format_help()
    for k, v in DEFAULTS.items():
        assert f"default {v}" in text, k


def test_output_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        run(["classify", "two_times"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_console_script_runs():
    r = subprocess.run(
        [sys.executable, "-m", "ckgraph.cli", "kgraph-validate", "omega", "--m", "3,2"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"] == "valid"


# -- documents -------------------------------------------------------------------------


@pytest.mark.parametrize("name", families.fixture_names())
def test_fixture_round_trip(name):
    obj = families.build(name)
    doc = families.fixture_document(name)
    assert families.load_document(doc) == obj
    assert families.load_document(json.loads(json.dumps(obj.to_dict()))) == obj


def test_desourcified_fragment_round_trip():
    from ckgraph.desourcify import materialize_truncation
    from ckgraph.kgraph import KGraph

    frag = materialize_truncation(families.omega_2_32(), (2, 2)).fragment()
    assert KGraph.from_dict(json.loads(json.dumps(frag.to_dict()))) == frag
