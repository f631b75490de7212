import csv
import json
from pathlib import Path

import pytest

from naqkit.bitcode import length_lex
from naqkit.bounds import gc_index_vs_p
from naqkit.cli import main
from naqkit.descsel import prefix_flag_system
from naqkit.oracles import khat_brute

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_registry(capsys):
    code, out = run(capsys, "registry")
    assert code == 0 and json.loads(out)["headers"]["machine"] == "1"


def test_khat_golden_csv(tmp_path):
    out = tmp_path / "khat.csv"
    corpus = GOLDEN / "khat_corpus.jsonl"
    assert main(["khat", "--corpus", str(corpus), "--caps-len", "16", "--format", "csv",
                 "-o", str(out)]) == 0
    assert out.read_text() == (GOLDEN / "khat.csv").read_text()


def test_khat_golden_agrees_with_oracle():
    xs = {json.loads(l)["id"]: json.loads(l)["x"] for l in (GOLDEN / "khat_corpus.jsonl").open()}
    for row in csv.DictReader((GOLDEN / "khat.csv").open()):
        assert float(row["value"]) == khat_brute(xs[row["input-id"]], 16)


def test_gc_index_golden_table():
    fs = prefix_flag_system(4)
    rows = list(csv.DictReader((GOLDEN / "gc_index.csv").open()))
    assert [r["x"] for r in rows] == list(length_lex(4))[:20]
    for row in rows:
        rep = gc_index_vs_p(row["x"], row["y"], fs)
        assert int(row["index"]) == int("1" + row["y"][1:], 2)
        got = [rep["index"], rep["log_index"], rep["log_inv_p"], rep["gap"]]
        assert got == [int(row[k]) for k in ("index", "log_index", "log_inv_p", "gap")]


def test_khat_bits_and_bad_input(capsys):
    code, out = run(capsys, "khat", "0110", "--caps-len", "16")
    assert code == 0 and json.loads(out)["rows"][0]["value"] == 10
    assert main(["khat", "01x"]) == 3
    code, out = run(capsys, "khat", "0000", "--method", "compressor:lz78")
    assert code == 0 and json.loads(out)["rows"][0]["method"].startswith("compressor")


def test_profile_then_rank(tmp_path, capsys):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text("\n".join(json.dumps(r) for r in [
        {"id": "a", "x": "0110", "predicate": {"name": "equals-x"}},
        {"id": "b", "x_hex": "0000000180", "predicate": {"name": "prefix-x"}},
        {"id": "c", "x_symbols": [2, 0, 1], "alphabet": 3, "predicate": {"name": "ends-in-1"}},
        {"id": "d", "x": "", "predicate": {"name": "never"}},
    ]) + "\n")
    pool = tmp_path / "pool.jsonl"
    assert main(["profile", str(corpus), "--caps-len", "16", "-o", str(pool)]) == 0
    recs = [json.loads(l) for l in pool.read_text().splitlines()]
    assert [r["id"] for r in recs] == ["a", "b", "c", "d"]
    assert recs[0]["m"] == 10 and recs[1]["m"] == 5
    assert recs[3]["m"] is None and recs[3]["status"] == "cap-exhausted"
    code, out = run(capsys, "rank", str(pool), "--id", "a")
    body = json.loads(out)
    assert code == 0 and body["ranking"]["infinite"] == ["d"]
    assert body["manifest"]["schema_version"] == "report-1"
    assert main(["rank", str(pool), "--id", "d"]) == 3
    assert main(["naq", "rank", str(pool), "--m", "7", "--format", "csv"]) == 0


def test_profile_levin_and_compressor(tmp_path, capsys):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text(json.dumps({"id": "a", "x": "101"}) + "\n")
    code, out = run(capsys, "profile", str(corpus), "--predicate", "equals-x", "--method", "levin",
                    "--budget-B", "14")
    assert code == 0 and json.loads(out)["method"] == "levin"
    code, out = run(capsys, "profile", str(corpus), "--predicate", "equals-x",
                    "--method", "compressor:zlib")
    assert code == 0 and json.loads(out)["m"] > 0


def test_profile_data_errors(tmp_path):
    assert main(["profile", str(tmp_path / "missing.jsonl")]) == 3
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert main(["profile", str(bad), "--predicate", "always"]) == 3
    nopred = tmp_path / "np.jsonl"
    nopred.write_text(json.dumps({"id": "a", "x": "1"}) + "\n")
    assert main(["profile", str(nopred)]) == 3
    assert main(["profile", str(nopred), "--predicate", "always", "--method", "bogus"]) == 3


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["verify", "nosuch"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_naq_band_and_stability(tmp_path, capsys):
    code, out = run(capsys, "naq", "band", "--n", "1000", "--epsilon", "0.05")
    assert code == 0 and round(json.loads(out)["bound"], 5) == 0.01348
    code, out = run(capsys, "naq", "band", "--n", "1000", "--confidence", "0.95")
    assert abs(json.loads(out)["epsilon"] - 0.0430) < 1e-4
    T, T2 = tmp_path / "t.jsonl", tmp_path / "t2.jsonl"
    T.write_text('{"id": "a", "m": 1}\n{"id": "b", "m": 2}\n')
    T2.write_text(T.read_text() + '{"id": "c", "m": 3}\n')
    assert main(["naq", "stability", str(T), str(T2)]) == 0
    assert main(["naq", "stability", str(T2), str(T)]) == 3


def test_bounds_commands(capsys):
    code, out = run(capsys, "bounds", "fano", "--H", "3", "--support", "8")
    assert code == 0 and json.loads(out)["bound"] == 2.0
    code, out = run(capsys, "bounds", "gc", "--p", "0.01", "--eps", "0.05")
    assert json.loads(out)["required"] == 300
    assert main(["bounds", "gc", "--p", "0.1", "--n", "10", "--trials", "2000"]) == 0
    assert main(["bounds", "identity", "--n", "4"]) == 0
    assert main(["bounds", "panel", "--size", "4"]) == 0
    assert main(["bounds", "panel", "--size", "4", "--overlapping"]) == 1
    assert main(["bounds", "fano", "--H", "9", "--support", "8"]) == 3
    assert main(["bounds", "gc", "--p", "0"]) == 3


def test_verify_single_suite_csv(capsys):
    code, out = run(capsys, "verify", "fano", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "suite,result"


def test_verify_all_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "all", "--seed", "7", "-o", str(a)]) == 0
    assert main(["verify", "all", "--seed", "7", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
