import csv
import io
import json
import math

import pytest

from abctrees.cli import dumps, run
from abctrees.graph import abc_index, path_tree
from abctrees.treeio import parse_tree, tree_to_json, tree_to_text


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def p5(tmp_path):
    f = tmp_path / "p5.txt"
    f.write_text(tree_to_text(path_tree(5)))
    return f


def test_index(capsys, p5):
    code, out, _ = call(capsys, "index", str(p5))
    assert code == 0
    assert json.loads(out)["abc"] == 2 * math.sqrt(2)


def test_floats_round_trip():
    x = 0.1 + 0.2
    assert float(json.loads(dumps({"v": x}))["v"]) == x
    assert "0.30000000000000004" in dumps(x)


def test_brute_json(capsys):
    code, out, _ = call(capsys, "brute", "12")
    obj = json.loads(out)
    assert code == 0 and obj["n"] == 12
    assert obj["best_value"] == pytest.approx(7.716565036233378, abs=1e-15)
    assert abc_index(parse_tree(json.dumps(obj["witnesses"][0]))) == obj["best_value"]


def test_brute_capacity(capsys):
    code, _, err = call(capsys, "brute", "24")
    assert code == 4 and "capacity" in err


def test_bad_file(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("n 4\n0 1\n1 2\n")
    assert call(capsys, "index", str(f))[0] == 3
    f.write_text("{not json")
    assert call(capsys, "index", str(f))[0] == 3
    assert call(capsys, "index", str(tmp_path / "missing.txt"))[0] == 3


def test_usage_errors(capsys):
    assert call(capsys)[0] == 2
    assert call(capsys, "nosuchverb")[0] == 2
    assert call(capsys, "greedy")[0] == 2
    assert call(capsys, "greedy", "3", "1")[0] == 2
    assert call(capsys, "gamma", "10", "5")[0] == 2
    assert call(capsys, "verify", "no-such-lemma")[0] == 2
    assert call(capsys, "brute", "8", "--threads", "0")[0] == 2


def test_greedy(capsys):
    code, out, _ = call(capsys, "greedy", "3", "2", "1", "1", "1")
    obj = json.loads(out)
    assert code == 0 and obj["n"] == 5
    assert obj["abc"] == pytest.approx(2 * math.sqrt(2 / 3) + math.sqrt(2), abs=1e-12)


def test_family_emit_tree(capsys, tmp_path):
    f = tmp_path / "t.json"
    code, out, _ = call(capsys, "family", "312", "--emit-tree", str(f))
    obj = json.loads(out)
    assert code == 0 and obj["r"] == 0 and obj["s"] == 43
    t = parse_tree(f.read_text())
    assert t.n == 312 and abs(abc_index(t) - obj["best_value"]) < 1e-10
    # the config JSON is itself a valid tree file
    assert parse_tree(json.dumps(obj["config"])).n == 312


def test_gamma_csv(capsys):
    code, out, _ = call(capsys, "gamma", "365", "367")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["n"] for r in rows] == ["365", "366", "367"]
    assert rows[0]["lower"] == "-inf"
    assert float(rows[1]["upper"]) > float(rows[1]["lower"])


def test_scan_csv(capsys):
    code, out, _ = call(capsys, "scan", "523", "525")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["n", "r", "s", "best_value", "lower", "upper"]
    assert rows[-1]["r"] == "1"


def test_local_search_trace(capsys, tmp_path):
    f = tmp_path / "star.txt"
    f.write_text("n 8\n" + "".join(f"0 {i}\n" for i in range(1, 8)))
    tr = tmp_path / "trace.jsonl"
    code, out, _ = call(capsys, "local-search", str(f), "--trace", str(tr))
    obj = json.loads(out)
    lines = [json.loads(x) for x in tr.read_text().splitlines()]
    assert code == 0 and obj["moves"] == len(lines) > 0
    assert obj["abc"] < obj["abc_before"]
    assert lines[-1]["abc"] == pytest.approx(obj["abc"], abs=1e-9)


def test_verify_list_and_run(capsys):
    code, out, _ = call(capsys, "verify", "--list")
    ids = [row["id"] for row in json.loads(out)]
    assert code == 0 and "7k8" in ids
    code, out, _ = call(capsys, "verify", "7k8", "--param", "k=1..10", "--param", "du=80..200")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "verified"


def test_verify_counterexample_exit(capsys):
    # k = 49 below its threshold has negative values
    code, out, _ = call(capsys, "verify", "7k8", "--param", "k=49", "--param", "du=400..480")
    assert code == 5
    assert json.loads(out)["status"] == "counterexample"


def test_compare_and_export(capsys, p5, tmp_path):
    code, out, _ = call(capsys, "compare", str(p5), str(p5))
    obj = json.loads(out)
    assert code == 0 and obj["order"] == 0 and obj["isomorphic"]
    code, out, _ = call(capsys, "export", str(p5), "--dot")
    assert out.startswith("graph") and out.count("--") == 4
    code, out, _ = call(capsys, "export", str(p5))
    assert parse_tree(out).n == 5


def test_out_file(capsys, p5, tmp_path):
    dest = tmp_path / "o.json"
    assert call(capsys, "index", str(p5), "--out", str(dest))[0] == 0
    assert json.loads(dest.read_text())["n"] == 5


def test_tree_json_round_trip():
    t = path_tree(9)
    assert abc_index(parse_tree(json.dumps(tree_to_json(t)))) == abc_index(t)
