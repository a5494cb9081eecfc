import csv
import io
import numpy as np
import pytest

from repairidx.bench import (BenchMethod, DEFAULT_RATIOS, build_method, default_matrix,
                             gap_bigrams, gen_clustered, gen_zipf_corpus, grammar_heights,
                             pack_postings, pick_query_pairs, ratio_bucket, records_to_csv,
                             report_heights, run_bench, shuffle_lists)
from repairidx.baselines import PlainIndex
from repairidx.corpus import PostingList
from repairidx.errors import ConfigurationError, OracleMismatch

from conftest import fig1_postings


def lengths(p):
    return sorted(len(pl) for pl in p.values())


def test_zipf_saturation():
    p = gen_zipf_corpus(2, 10, exponent=50.0, seed=1)
    assert [len(pl) for pl in p.values()] == [10, 1]
    assert list(p.values())[0].docs == tuple(range(1, 11))


def test_zipf_deterministic():
    assert gen_zipf_corpus(50, 100, 1.0, 3) == gen_zipf_corpus(50, 100, 1.0, 3)
    assert gen_zipf_corpus(50, 100, 1.0, 3) != gen_zipf_corpus(50, 100, 1.0, 4)


@pytest.mark.parametrize("s", [0.8, 1.0, 1.3])
def test_zipf_exponent_fit(s):
    p = gen_zipf_corpus(400, 20_000, s, seed=2)
    ls = [len(pl) for pl in p.values()]
    ranks = [r for r, l in enumerate(ls, start=1) if l >= 20]
    slope = np.polyfit(np.log(ranks), np.log([ls[r - 1] for r in ranks]), 1)[0]
    assert abs(-slope - s) <= 0.1 * s


def test_zipf_rejects_empty():
    with pytest.raises(ConfigurationError):
        gen_zipf_corpus(0, 10)


def test_clustered_preserves_lengths_and_repeats_more():
    base = gen_zipf_corpus(300, 2000, 1.0, 5)
    cl = gen_clustered(base, 8, seed=1)
    assert lengths(cl) == lengths(base)
    assert all(len(cl[t]) == len(base[t]) for t in base)
    assert gen_clustered(base, 8, seed=1) == cl
    sh = shuffle_lists(cl, seed=1)
    assert gap_bigrams(cl) > gap_bigrams(sh)


def test_shuffle_lists():
    base = gen_zipf_corpus(100, 500, 1.0, 1)
    sh = shuffle_lists(base, 9)
    assert [len(sh[t]) for t in base] == [len(base[t]) for t in base]
    assert shuffle_lists(base, 9) == sh
    assert all(1 <= pl.docs[0] and pl.docs[-1] <= 500 for pl in sh.values())
    with pytest.raises(ConfigurationError):
        shuffle_lists({"x": PostingList("x", (1, 2, 3))}, 0, u=2)


def test_ratio_bucket():
    edges = [1, 2, 4, 8]
    assert ratio_bucket(1.0, edges) == 1
    assert ratio_bucket(3.9, edges) == 2
    assert ratio_bucket(100, edges) == 8
    assert ratio_bucket(0.5, edges) is None


def test_pick_query_pairs():
    p = gen_zipf_corpus(3000, 5000, 1.0, 2)
    qs = pick_query_pairs(p, DEFAULT_RATIOS, (200, 1000), 15, seed=4)
    assert qs.pairs
    edges = sorted(DEFAULT_RATIOS)
    for q in qs.pairs:
        n, m = len(p[q.long]), len(p[q.short])
        assert 200 <= n <= 1000
        assert m <= n and q.short != q.long
        assert q.bucket == ratio_bucket(n / m, edges)
    assert pick_query_pairs(p, DEFAULT_RATIOS, (200, 1000), 15, seed=4) == qs
    for b, group in qs.by_bucket().items():
        assert len(group) + qs.shortfall.get(b, 0) == 15
    # lists never exceed 1000/1 ... so ratio 1024 cannot be filled
    assert qs.shortfall.get(1024) == 15
    assert "ratio 1024: missing 15 of 15" in qs.report()


def test_band_excludes_short_lists():
    p = gen_zipf_corpus(500, 2000, 1.0, 2)
    qs = pick_query_pairs(p, [1, 4], (900, 1100), 5, seed=0)
    assert all(900 <= len(p[q.long]) <= 1100 for q in qs.pairs)
    empty = pick_query_pairs(p, [1], (10**6, 10**7), 5)
    assert empty.pairs == [] and empty.shortfall == {1: 5}


def test_bench_smoke_fig1():
    p = fig1_postings()
    methods = default_matrix(p, 11, ts=(1,), Bs=(8,), ks=(1,))
    qs = pick_query_pairs(p, [1], None, 3, seed=0)
    rows = run_bench(methods, qs, reps=1)
    assert len(rows) == len(methods) * len(qs.by_bucket())
    for r in rows:
        assert r.total_bytes == r.dict_bytes + r.seq_bytes + r.sample_bytes
        assert r.queries == len(qs.pairs)
        assert r.mean_ns > 0


def test_bench_aborts_on_mismatch():
    p = fig1_postings()
    plain = build_method(p, 11, "plain")
    qs = pick_query_pairs(p, [1], None, 3, seed=0)
    broken = PlainIndex(11, {t: docs[::2] for t, docs in plain.lists.items()})
    methods = [BenchMethod("plain", "merge", "none", plain),
               BenchMethod("broken", "merge", "none", broken)]
    with pytest.raises(OracleMismatch, match="broken"):
        run_bench(methods, qs, reps=1)


def test_csv_deterministic_except_timings():
    p = gen_zipf_corpus(200, 400, 1.0, 7)
    def once():
        methods = [BenchMethod("repair", "skip", "none", build_method(p, 400, "repair")),
                   BenchMethod("vbyte", "lookup", "b:8", build_method(p, 400, "vbyte", ("b", 8)))]
        qs = pick_query_pairs(p, [1, 4, 16], None, 4, seed=3)
        text = records_to_csv(run_bench(methods, qs, reps=2))
        rows = list(csv.DictReader(io.StringIO(text)))
        for r in rows:
            del r["mean_ns"], r["median_ns"]
        return text.splitlines()[0], rows
    h1, a = once()
    h2, b = once()
    assert h1 == h2 == ("method,sampling,ratio_bucket,band,mean_ns,median_ns,total_bytes,"
                        "dict_bytes,seq_bytes,sample_bytes,cardinality,queries")
    assert a == b


def test_heights():
    # on so small an input the space model prefers no rules at all
    assert grammar_heights(fig1_postings()) == (3, 0)
    assert grammar_heights({"x": PostingList("x", (5,))}) == (0, 0)
    p = gen_zipf_corpus(300, 1024, 1.0, 1)
    rows = report_heights(p, (1, 8, 64))
    assert [r.pack for r in rows] == [1, 8, 64]
    assert [r.u for r in rows] == [1024, 128, 16]
    for r in rows:
        assert r.height_optimal <= r.height_all
        assert r.height_all <= r.bound


def test_pack_postings():
    p = {"a": PostingList("a", (1, 2, 5, 9))}
    assert pack_postings(p, 4)["a"].docs == (1, 2, 3)
    assert pack_postings(p, 1) == p
