import csv
import json
import subprocess
import sys

import pytest

from repairidx.cli import main
from repairidx.corpus import write_documents
from repairidx.fileformat import deserialize

from conftest import fig1_postings


@pytest.fixture
def fig1_corpus(tmp_path):
    path = tmp_path / "fig1.txt"
    write_documents(path, 11, fig1_postings())
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("method", ["repair", "vbyte", "rice", "bitmap-hybrid", "plain"])
def test_build_and_query(tmp_path, capsys, fig1_corpus, method):
    out = tmp_path / "ix.rpi"
    sampling = "none" if method == "plain" else "b:2"
    code, text, _ = run(capsys, "build", "--input", fig1_corpus, "--method", method,
                        "--sampling", sampling, "--out", out)
    assert code == 0 and "3 terms, u=11" in text
    code, text, _ = run(capsys, "query", "--index", out, "--terms", "alpha", "beta")
    assert code == 0
    assert text.splitlines() == ["3 documents", "3 7 11"]
    code, text, _ = run(capsys, "query", "--index", out, "--terms", "alpha", "beta", "gamma")
    assert text.splitlines() == ["1 documents", "3"]


def test_build_options(tmp_path, capsys, fig1_corpus):
    out = tmp_path / "ix.rpi"
    code, _, _ = run(capsys, "build", "--input", fig1_corpus, "--sums", "off", "--cut", "optimal",
                     "--mode", "approximate", "--sampling", "a:2", "--out", out)
    assert code == 0
    ix = deserialize(out)
    assert not ix.forest.with_sums and ix.cut_policy == "optimal" and ix.mode == "approximate"
    assert ix.sampling == ("a", 2)
    code, text, _ = run(capsys, "query", "--index", out, "--terms", "gamma", "--strategy", "svs-bin")
    assert text.splitlines()[1] == "1 3 4 6 8 10"


def test_pack_flag(tmp_path, capsys, fig1_corpus):
    out = tmp_path / "ix.rpi"
    run(capsys, "build", "--input", fig1_corpus, "--pack", "4", "--out", out)
    ix = deserialize(out)
    assert ix.u == 3
    assert ix.decode("beta") == [1, 2, 3]


def test_unknown_term_exit_code(tmp_path, capsys, fig1_corpus):
    out = tmp_path / "ix.rpi"
    run(capsys, "build", "--input", fig1_corpus, "--out", out)
    code, _, err = run(capsys, "query", "--index", out, "--terms", "delta")
    assert code == 2 and "unknown term 'delta'" in err


def test_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.rpi"
    bad.write_bytes(b"nope")
    code, _, err = run(capsys, "query", "--index", bad, "--terms", "x")
    assert code == 2 and "header" in err


def test_bad_sampling_argument(capsys, fig1_corpus, tmp_path):
    with pytest.raises(SystemExit):
        main(["build", "--input", str(fig1_corpus), "--sampling", "c:3", "--out", str(tmp_path / "x")])


def test_gen_and_stats(tmp_path, capsys):
    z = tmp_path / "z.txt"
    code, text, _ = run(capsys, "gen", "zipf", "--V", 60, "--u", 120, "--seed", 1, "--out", z)
    assert code == 0 and "60 terms, 120 documents" in text
    for kind in ("clustered", "shuffle"):
        code, text, _ = run(capsys, "gen", kind, "--input", z, "--out", tmp_path / f"{kind}.txt")
        assert code == 0 and "60 terms" in text
    out = tmp_path / "z.rpi"
    run(capsys, "build", "--input", z, "--sampling", "b:8", "--out", out)
    code, text, _ = run(capsys, "stats", "--index", out)
    stats = json.loads(text)
    assert stats["method"] == "repair" and stats["terms"] == 60
    assert sum(stats["file_bytes"].values()) == out.stat().st_size
    assert stats["space_model"]["model"] <= stats["space_model"]["packed"]
    code, text, _ = run(capsys, "stats", "--heights", "--V", 50, "--u", 256, "--packings", "1,4")
    assert text.splitlines()[0].startswith("pack")
    assert len(text.splitlines()) == 3


def test_bench_csv(tmp_path, capsys, fig1_corpus):
    out = tmp_path / "b.csv"
    code, _, err = run(capsys, "bench", "--input", fig1_corpus, "--pairs", 3, "--reps", 1,
                       "--ratios", "1", "--csv", out)
    assert code == 0 and "query pairs" in err
    rows = list(csv.DictReader(out.open()))
    assert rows
    methods = {r["method"] for r in rows}
    assert {"plain/merge", "repair/skip", "vbyte/lookup", "repair/svs-exp"} <= methods
    for r in rows:
        assert int(r["total_bytes"]) == sum(int(r[k]) for k in ("dict_bytes", "seq_bytes",
                                                                  "sample_bytes"))


def test_bench_specs_and_workers(tmp_path, capsys, fig1_corpus):
    code, text, _ = run(capsys, "bench", "--input", fig1_corpus, "--pairs", 3, "--reps", 1,
                        "--ratios", "1", "--indexes", "repair/skip", "rice/lookup/b:8",
                        "hybrid-repair", "--workers", 2)
    assert code == 0
    rows = list(csv.DictReader(text.splitlines()))
    assert {r["method"] for r in rows} == {"repair/skip", "rice/lookup", "hybrid-repair/skip"}


def test_module_entry_point(tmp_path, fig1_corpus):
    out = tmp_path / "ix.rpi"
    res = subprocess.run([sys.executable, "-m", "repairidx", "build", "--input", str(fig1_corpus),
                          "--out", str(out)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert out.exists()
