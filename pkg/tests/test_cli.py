import io
import json

import pytest

from qkrec.bigrec import full_theory
from qkrec.cache import cache_key, cached_full_theory
from qkrec.cli import UsageError, format_document, parse_basis, parse_insertions, parse_shape, run
from qkrec.golden import load_tables
from qkrec.target import preset


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def call_json(*argv):
    code, text = call(*argv, "--format", "json")
    return code, json.loads(text) if text else None


# -- documented examples --------------------------------------------------------------

def test_verify_cp1_passes_with_errata():
    code, doc = call_json("verify", "--suite", "paper", "--target", "cp1")
    assert code == 0
    ids = {e["id"]: e["status"] for e in doc["entries"]}
    for d in range(1, 5):
        assert ids["cp1.g%d" % d] == "PASS"
    assert {"cp1.A1", "cp1.A2.0", "cp1.y3", "cp1.y4", "cp1.x4"} <= {k for k, v in ids.items()
                                                                   if v == "PASS"}
    assert ids["cp1.x3"] == ids["cp1.A2.1"] == "ERRATUM"


def test_fl3_finiteness():
    code, doc = call_json("small", "--target", "fl3", "--qdeg", "6", "--emit", "finiteness")
    assert code == 0
    assert doc["finiteness"]["stable"] is True and doc["finiteness"]["max_degree"] == 2


def test_cp2_degree_one_table_matches_the_fixture():
    code, doc = call_json("invariants", "--target", "cpn:2", "--degree", "1",
                          "--max-table", "15x15")
    assert code == 0
    want = load_tables()[1]["values"]
    assert [[int(x) for x in row] for row in doc["table"]] == want
    # degree-one invariants vanish once three or more points are imposed
    assert all(x == int(j < 3) for row in want for j, x in enumerate(row))


# -- other subcommands ---------------------------------------------------------------

def test_targets_lists_the_presets():
    code, doc = call_json("targets")
    assert code == 0
    ids = {t["id"] for t in doc["targets"]}
    assert {"cp1", "cp2", "fl3"} <= ids


def test_relations_and_their_exit_codes():
    code, doc = call_json("relation", "--target", "cpn:1", "--qdeg", "3",
                          "--expr", "(1-a1)^2 - Q1")
    assert code == 0 and doc["holds"] is True
    code, doc = call_json("relation", "--target", "cpn:1", "--qdeg", "3", "--expr", "(1-a1)^2")
    assert code == 1 and doc["holds"] is False and doc["residual"]


def test_small_relations_default_to_the_known_ones():
    code, doc = call_json("small", "--target", "fl3", "--qdeg", "3", "--emit", "relations")
    assert code == 0 and all(doc["relations"].values()) and len(doc["relations"]) == 2


def test_semisimplicity_reports_a_combination():
    code, doc = call_json("small", "--target", "fl3", "--qdeg", "3", "--emit", "semisimplicity")
    assert code == 0 and doc["semisimple"] == {"1,1": True}
    assert any(e["squarefree"] and "+" in e["operator"] for e in doc["semisimplicity"])


def test_single_invariant():
    code, doc = call_json("invariants", "--target", "cpn:2", "--degree", "1",
                          "--insertions", "pt:2")
    assert code == 0 and doc["value"] == "1"


def test_big_in_a_presentation_basis():
    code, doc = call_json("big", "--target", "cpn:1", "--qdeg", "1", "--emit", "products",
                          "--basis", "1,1;0,-1")
    assert code == 0 and doc["basis"] == "1,1;0,-1"
    assert "1" in doc["products"][1]


def test_check_passes_on_a_small_cutoff():
    code, doc = call_json("check", "--target", "cp1", "--qdeg", "2")
    assert code == 0


# -- usage errors ----------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["small", "--target", "grassmannian", "--qdeg", "2", "--emit", "A"],
    ["small", "--target", "cp1", "--qdeg", "-1", "--emit", "A"],
    ["small", "--target", "cp1", "--qdeg", "2", "--emit", "nonsense"],
    ["big", "--target", "cp1", "--qdeg", "1", "--emit", "A", "--basis", "1,2;3"],
    ["invariants", "--target", "cp1", "--degree", "1"],
    ["invariants", "--target", "fl3", "--degree", "1", "--insertions", "pt:1"],
    ["invariants", "--target", "cp1", "--degree", "1", "--max-table", "3by3"],
    ["check", "--target", "cp1", "--threads", "0"],
])
def test_usage_errors_exit_with_two(argv, capsys):
    assert run(argv, stdout=io.StringIO()) == 2


# -- output ----------------------------------------------------------------------------

def test_json_is_byte_identical_across_runs():
    argv = ("big", "--target", "cpn:1", "--qdeg", "2", "--emit", "potential")
    assert call(*argv, "--format", "json") == call(*argv, "--format", "json")
    assert call(*argv, "--format", "csv") == call(*argv, "--format", "csv")


def test_csv_rows_are_path_value_pairs():
    code, text = call("small", "--target", "cpn:1", "--qdeg", "1", "--emit", "pairing",
                      "--format", "csv")
    lines = text.strip().splitlines()
    assert code == 0 and lines[0] == "path,value"
    assert all(line.count(",") >= 1 for line in lines[1:])


def test_pretty_groups_exponentials():
    code, text = call("big", "--target", "cpn:1", "--qdeg", "1", "--emit", "products",
                      "--basis", "1,1;0,-1")
    assert code == 0 and "[0, e^{-t1}(1 + t1)]" in text


def test_out_writes_a_file(tmp_path):
    path = tmp_path / "doc.json"
    code, text = call("targets", "--format", "json", "--out", str(path))
    assert code == 0 and text == ""
    assert json.loads(path.read_text())["targets"]


def test_format_document_sorts_keys():
    assert format_document({"b": 1, "a": [1, 2]}, "json") == \
        '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'


def test_argument_parsers():
    assert parse_basis("1,1;0,-1") == [[1, 1], [0, -1]]
    assert parse_shape("15x13") == (15, 13)
    assert parse_insertions("H:2,pt:3") == [("H", 2), ("pt", 3)]
    for bad in ("1,1;0", "a,b;c,d"):
        with pytest.raises(UsageError):
            parse_basis(bad)
    with pytest.raises(UsageError):
        parse_insertions("H:-1")


# -- on-disk cache ------------------------------------------------------------------

def test_cache_roundtrip(tmp_path):
    t = preset("cp1")
    first = cached_full_theory(t, 2, tmp_path)
    files = list(tmp_path.glob("*.json"))
    assert [f.name for f in files] == ["%s.json" % cache_key(t, 2)]
    second = cached_full_theory(t, 2, tmp_path)
    assert "loaded from cache" in second.log
    assert dict(second.F.items()) == dict(first.F.items())
    assert second.big_shift.A == first.big_shift.A


def test_cache_key_separates_cutoffs():
    t = preset("cp2")
    assert cache_key(t, 1) != cache_key(t, 2)
    assert cache_key(t, 1) != cache_key(preset("cp1"), 1)


def test_unreadable_cache_entry_is_rebuilt(tmp_path):
    t = preset("cp1")
    (tmp_path / ("%s.json" % cache_key(t, 1))).write_text("{}")
    state = cached_full_theory(t, 1, tmp_path)
    assert dict(state.F.items()) == dict(full_theory(t, 1).F.items())


def test_cli_uses_the_cache_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("QK_CACHE_DIR", str(tmp_path))
    argv = ("big", "--target", "cpn:1", "--qdeg", "2", "--emit", "pairing", "--format", "json")
    first = call(*argv)
    assert list(tmp_path.glob("*.json"))
    assert call(*argv) == first
