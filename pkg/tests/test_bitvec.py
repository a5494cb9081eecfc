import random

import pytest
from hypothesis import given, strategies as st

from repairidx.bitvec import RankBitmap, build_rank

FIG1_RB = "11000100100"


def naive_rank0(bits, i):
    return sum(1 for b in bits[:i] if b == 0)


def test_fig1_shape():
    bm = build_rank(FIG1_RB)
    assert len(bm) == 11
    assert bm.zeros == 7
    assert str(bm) == FIG1_RB


def test_fig1_rank0_and_access():
    bm = build_rank(FIG1_RB)
    assert bm.rank0(5) == 3
    assert bm.rank0(0) == 0
    assert bm.access(1) == 1
    assert bm.access(3) == 0
    assert [bm.rank0(i) for i in range(12)] == [0, 0, 0, 1, 2, 3, 3, 4, 5, 5, 6, 7]


def test_empty_and_single_bit():
    assert build_rank("").rank0(0) == 0
    assert build_rank([]).zeros == 0
    assert build_rank("0").access(1) == 0


@pytest.mark.parametrize("i", [-1, 12])
def test_rank_out_of_range(i):
    with pytest.raises(IndexError):
        build_rank(FIG1_RB).rank0(i)


@pytest.mark.parametrize("i", [0, 12])
def test_access_out_of_range(i):
    with pytest.raises(IndexError):
        build_rank(FIG1_RB).access(i)


def test_large_random_against_scan():
    rng = random.Random(7)
    bits = [rng.getrandbits(1) for _ in range(100_000)]
    bm = build_rank(bits)
    prefix = [0]
    for b in bits:
        prefix.append(prefix[-1] + (b == 0))
    for i in rng.sample(range(len(bits) + 1), 1000):
        assert bm.rank0(i) == prefix[i]
    assert bm.rank0(len(bits)) == prefix[-1]


def test_all_positions_up_to_10k():
    rng = random.Random(3)
    bits = [1 if rng.random() < 0.3 else 0 for _ in range(10_000)]
    bm = build_rank(bits)
    count = 0
    for i in range(1, len(bits) + 1):
        count += bits[i - 1] == 0
        assert bm.rank0(i) == count


def test_roundtrip_through_words():
    rng = random.Random(11)
    bits = [rng.getrandbits(1) for _ in range(1000)]
    bm = build_rank(bits)
    again = RankBitmap(words=bm.words, length=len(bm), counters=bm.counters)
    assert again == bm
    assert list(again) == bits


def test_directory_overhead_is_small():
    bm = build_rank([1, 0] * 50_000)
    sup, blk = bm.counters
    # 32-bit superblock counters plus 9-bit block counters, per payload bit
    overhead = len(sup) * 32 + len(blk) * 9
    assert overhead < 0.25 * len(bm)


@given(st.lists(st.integers(0, 1), max_size=1500))
def test_rank0_plus_rank1(bits):
    bm = build_rank(bits)
    assert bm.zeros == naive_rank0(bits, len(bits))
    prev = 0
    for i in range(len(bits) + 1):
        r0 = bm.rank0(i)
        assert r0 + bm.rank1(i) == i
        assert r0 >= prev
        prev = r0
    for i in range(1, len(bits) + 1):
        assert bm.access(i) == bits[i - 1]
