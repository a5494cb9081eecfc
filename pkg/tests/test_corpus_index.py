import random
import re

import pytest
from hypothesis import given, settings, strategies as st

from repairidx.corpus import (PostingList, from_gaps, parse_corpus, prefix_sums, read_documents,
                              to_gaps, tokenize, write_documents)
from repairidx.errors import ConfigurationError, InvariantViolation, UnknownTermError
from repairidx.index import bucket_shift, compress_index, sample_a, sample_b, space_model

from conftest import fig1_postings


def random_postings(rng, V, u, top=None):
    top = top or u
    out = {}
    for r in range(1, V + 1):
        n = max(1, min(u, round(top / r)))
        t = f"t{r:04d}"
        out[t] = PostingList(t, tuple(sorted(rng.sample(range(1, u + 1), n))))
    return out


# ---------------------------------------------------------------- corpus

def test_parse_case_folding_and_dedup():
    u, p = parse_corpus(["Ab ab.", "ab"])
    assert u == 2
    assert p == {"ab": PostingList("ab", (1, 2))}


def test_digits_stay_in_words():
    _, p = parse_corpus(["x1y and x_z"])
    assert set(p) == {"x1y", "and", "x", "z"}


def test_zero_documents():
    assert parse_corpus([]) == (0, {})


def test_pack_merges_documents():
    u, p = parse_corpus(["a", "b", "a b", "c", "a"], pack=2)
    assert u == 3
    assert p["a"].docs == (1, 2, 3)
    assert p["c"].docs == (2,)


def test_random_corpus_against_naive_tokenizer():
    rng = random.Random(4)
    alphabet = "abcXY12 .,_-\n"
    docs = ["".join(rng.choice(alphabet) for _ in range(rng.randint(0, 40))) for _ in range(60)]
    u, p = parse_corpus(docs)
    assert u == 60
    for i, doc in enumerate(docs, start=1):
        # naive: split on anything that is not an ASCII letter or digit
        words = {w.lower() for w in re.split(r"[^A-Za-z0-9]+", doc) if w}
        have = {t for t, pl in p.items() if i in pl.docs}
        assert have == words


def test_tokenize_unicode_letters():
    assert tokenize("Éte naïve ÜBER") == ["éte", "naïve", "über"]


def test_read_documents_file_and_dir(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("one two\n---\nthree\n---\n\n")
    assert read_documents(f) == ["one two\n", "three\n", "\n"]
    d = tmp_path / "docs"
    d.mkdir()
    (d / "b.txt").write_text("bee")
    (d / "a.txt").write_text("ay")
    assert read_documents(d) == ["ay", "bee"]
    g = tmp_path / "s.txt"
    g.write_text("x\n%%\ny\n")
    assert read_documents(g, "%%") == ["x\n", "y\n"]


def test_write_then_read_documents(tmp_path):
    p = fig1_postings()
    path = tmp_path / "fig1.txt"
    write_documents(path, 11, p)
    u, back = parse_corpus(read_documents(path))
    assert u == 11
    assert {t: pl.docs for t, pl in back.items()} == {t: pl.docs for t, pl in p.items()}


def test_gaps_examples():
    assert to_gaps(PostingList("b", (2, 3, 7, 9, 11))) == [2, 1, 4, 2, 2]
    assert to_gaps((1, 3, 4, 6, 8, 10)) == [1, 2, 1, 2, 2, 2]
    assert to_gaps((5,)) == [5]
    assert from_gaps([2, 1, 4, 2, 2]).docs == (2, 3, 7, 9, 11)
    assert prefix_sums([1, 2], base=10) == [11, 13]


@pytest.mark.parametrize("docs", [(3, 3), (4, 2), (0, 1)])
def test_invalid_lists(docs):
    with pytest.raises(InvariantViolation):
        to_gaps(docs)
    with pytest.raises(InvariantViolation):
        PostingList("x", docs)


def test_from_gaps_rejects_zero():
    with pytest.raises(InvariantViolation):
        from_gaps([1, 0])


@given(st.sets(st.integers(1, 10_000), max_size=80))
def test_gap_roundtrip(ids):
    docs = tuple(sorted(ids))
    assert from_gaps(to_gaps(docs)).docs == docs


# ---------------------------------------------------------------- compress_index

def test_fig1_index(fig1_index):
    ix = fig1_index
    assert ix.C == [12, 20, 2, 20, 17, 12, 17]
    assert [ix.vocab[t].pointer + 1 for t in ("alpha", "beta", "gamma")] == [1, 3, 6]
    assert [ix.vocab[t].clen for t in ("alpha", "beta", "gamma")] == [2, 3, 2]
    assert [ix.vocab[t].length for t in ("alpha", "beta", "gamma")] == [6, 5, 6]
    assert str(ix.forest.rb) == "11000100100"
    assert ix.phrase_sums("beta") == [2, 5, 4]
    for t, pl in fig1_postings().items():
        assert ix.decode(t) == list(pl.docs)


def test_single_one_element_list():
    ix = compress_index({"x": PostingList("x", (4,))})
    assert ix.C == [4] and len(ix.forest.rb) == 0 and ix.u == 4


def test_u_smaller_than_ids():
    with pytest.raises(ConfigurationError):
        compress_index(fig1_postings(), 5)


def test_unknown_term(fig1_index):
    with pytest.raises(UnknownTermError):
        fig1_index.decode("delta")
    with pytest.raises(KeyError):
        sample_a(fig1_index, "delta", 1)


@pytest.mark.parametrize("mode,sums,cut", [("exact", True, "all"), ("exact", False, "optimal"),
                                           ("approximate", True, "optimal"),
                                           ("approximate", False, "all")])
def test_500_term_roundtrip(mode, sums, cut):
    rng = random.Random(17)
    p = random_postings(rng, 500, 800)
    ix = compress_index(p, 800, mode=mode, with_sums=sums, cut_policy=cut)
    for t, pl in p.items():
        assert ix.decode(t) == list(pl.docs)
    # segments partition C in vocabulary order
    pos = 0
    for e in ix.vocab.values():
        assert e.pointer == pos
        pos += e.clen
    assert pos == len(ix.C)


def test_space_model_within_slack():
    rng = random.Random(2)
    ix = compress_index(random_postings(rng, 200, 500), 500)
    m = space_model(ix)
    assert m["model"] <= m["packed"] <= m["model"] + m["slack"]


# ---------------------------------------------------------------- samplings

def test_sample_a_gamma(fig1_index):
    assert sample_a(fig1_index, "gamma", 1).values == [0, 6]
    assert sample_a(fig1_index, "gamma", 2).values == [0]
    assert sample_a(fig1_index, "beta", 2).values == [0, 7]
    with pytest.raises(ConfigurationError):
        sample_a(fig1_index, "gamma", 0)


def test_sample_b_gamma(fig1_index):
    smp = sample_b(fig1_index, "gamma", 1, k=2)
    assert list(zip(smp.values, smp.offsets)) == [(0, 1), (0, 1), (6, 2)]
    # with the B-derived shift: u*B/l = 11*2/6 -> 2**k >= 3.67 -> k = 2
    assert sample_b(fig1_index, "gamma", 2).k == 2
    low = sample_b(fig1_index, "gamma", 1, k=5)
    assert list(zip(low.values, low.offsets)) == [(0, 1)]


def test_bucket_shift():
    assert bucket_shift(11, 6, 2) == 2
    assert bucket_shift(1024, 1024, 1) == 0
    assert bucket_shift(1024, 16, 64) == 12
    with pytest.raises(ConfigurationError):
        bucket_shift(10, 2, 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8), st.integers(1, 300))
def test_samples_resume_expansion(seed, t, B):
    rng = random.Random(seed)
    p = random_postings(rng, 12, 300, top=120)
    ix = compress_index(p, 300)
    for term, pl in p.items():
        seg = ix.segment(term)
        a = sample_a(ix, term, t)
        values = a.values
        assert all(x < y for x, y in zip(values, values[1:]))
        for j, v in enumerate(values):
            tail = [g for s in seg[j * t:] for g in ix.forest.expand(s)]
            assert prefix_sums(tail, v) == [d for d in pl.docs if d > v]
        b = sample_b(ix, term, B)
        step = 1 << b.k
        assert len(b) == pl.docs[-1] // step + 1
        for d in pl.docs:
            value, off = b.entry(d)
            tail = [g for s in seg[off - 1:] for g in ix.forest.expand(s)]
            assert d in prefix_sums(tail, value)
            assert value < d
