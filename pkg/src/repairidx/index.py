"""Re-Pair compressed inverted index: concatenated lists, sentinels, samplings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .corpus import PostingList, prefix_sums, to_gaps
from .errors import ConfigurationError, UnknownTermError
from .grammar import (APPROX_CAPACITY, GrammarForest, RuleList, build_forest,
                      encode_sequence, model_bits, optimize_cut, repair_compress,
                      symbol_bits, unroll_to)
from .packing import width_for


@dataclass(frozen=True)
class VocabEntry:
    pointer: int  # offset of the list's first symbol in C
    clen: int     # compressed length, in C symbols
    length: int   # uncompressed length


@dataclass
class SampleArrayA:
    """Absolute value preceding symbols 0, t, 2t, ... of a list segment."""
    t: int
    values: list[int]

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class SampleArrayB:
    """Per domain bucket of width 2**k: the value preceding, and the 1-based
    segment offset of, the phrase holding the bucket's first element."""
    k: int
    values: list[int]
    offsets: list[int]

    def __len__(self) -> int:
        return len(self.values)

    def entry(self, x: int) -> tuple[int, int] | None:
        i = x >> self.k
        if i >= len(self.values):
            return None
        return self.values[i], self.offsets[i]


def bucket_shift(u: int, length: int, B: int) -> int:
    """Smallest k with 2**k >= u*B/length, i.e. ceil(log2(uB/l))."""
    if B < 1:
        raise ConfigurationError("B must be >= 1")
    target = u * B
    k = 0
    while (length << k) < target:
        k += 1
    return k


@dataclass
class CompressedIndex:
    u: int
    vocab: dict[str, VocabEntry]
    C: list[int]
    forest: GrammarForest
    mode: str = "exact"
    cut_policy: str = "all"
    sampling: tuple[str, int] | None = None
    samples: dict = field(default_factory=dict)
    rules: RuleList | None = None  # creation-order rules, kept when built in-process

    method = "repair"

    @property
    def shift(self) -> int:
        return self.forest.shift

    @property
    def width(self) -> int:
        return width_for(self.shift + self.forest.bits)

    @property
    def terms(self) -> list[str]:
        return list(self.vocab)

    def __contains__(self, term: str) -> bool:
        return term in self.vocab

    def entry(self, term: str) -> VocabEntry:
        try:
            return self.vocab[term]
        except KeyError:
            raise UnknownTermError(term) from None

    def length(self, term: str) -> int:
        return self.entry(term).length

    def segment(self, term: str) -> list[int]:
        e = self.entry(term)
        return self.C[e.pointer:e.pointer + e.clen]

    def gaps(self, term: str) -> list[int]:
        out: list[int] = []
        exp = self.forest.expand
        shift = self.shift
        for v in self.segment(term):
            if v <= shift:
                out.append(v)
            else:
                out.extend(exp(v))
        return out

    def decode(self, term: str) -> list[int]:
        return prefix_sums(self.gaps(term))

    def phrase_sums(self, term: str) -> list[int]:
        ps = self.forest.phrase_sum
        return [ps(v) for v in self.segment(term)]

    def with_sampling(self, kind: str | None, param: int | None = None) -> "CompressedIndex":
        """Copy sharing C and the forest, with one sampling attached."""
        if kind in (None, "none"):
            return replace(self, sampling=None, samples={})
        if kind == "a":
            samples = {t: sample_a(self, t, param) for t in self.vocab}
        elif kind == "b":
            samples = {t: sample_b(self, t, param) for t in self.vocab}
        else:
            raise ConfigurationError(f"unknown sampling {kind!r}")
        return replace(self, sampling=(kind, int(param)), samples=samples)

    def sample_bits(self) -> int:
        vbits = width_for(self.u)
        total = 0
        for term, smp in self.samples.items():
            if isinstance(smp, SampleArrayA):
                total += len(smp) * vbits
            else:
                total += len(smp) * (vbits + width_for(self.vocab[term].clen))
        return total

    def size_breakdown(self) -> dict[str, int]:
        """Bit counts of the serialized payload, before word padding."""
        w = self.width
        f = self.forest
        return {
            "dictionary": f.bits + len(f.rs) * w,
            "sequence": len(self.C) * w,
            "samples": self.sample_bits(),
        }


def compress_index(postings: Mapping[str, PostingList], u: int | None = None, *,
                   mode: str = "exact", with_sums: bool = True, cut_policy: str = "all",
                   budget: int = APPROX_CAPACITY) -> CompressedIndex:
    """Concatenate the gap lists behind unique sentinels and Re-Pair them."""
    if cut_policy not in ("all", "optimal"):
        raise ConfigurationError(f"unknown cut policy {cut_policy!r}")
    top = max((pl.docs[-1] for pl in postings.values() if pl.docs), default=0)
    if u is None:
        u = top
    elif top > u:
        raise ConfigurationError(f"document id {top} exceeds u={u}")
    seq: list[int] = []
    lengths: list[int] = []
    for i, pl in enumerate(postings.values()):
        seq.append(-(i + 1))
        seq.extend(to_gaps(pl.docs))
        lengths.append(len(pl))
    C, rules = repair_compress(seq, mode, budget)
    if cut_policy == "optimal":
        cut, _ = optimize_cut(rules, C, 1 if with_sums else 0)
        C, rules = unroll_to(C, rules, cut)
    forest, position = build_forest(rules, with_sums, u)
    encoded = encode_sequence(C, rules, position, u)

    vocab: dict[str, VocabEntry] = {}
    flat: list[int] = []
    terms = list(postings)
    current = -1
    start = 0
    for v in encoded:
        if v <= 0:
            if current >= 0:
                vocab[terms[current]] = VocabEntry(start, len(flat) - start, lengths[current])
            current = -v - 1
            start = len(flat)
        else:
            flat.append(v)
    if current >= 0:
        vocab[terms[current]] = VocabEntry(start, len(flat) - start, lengths[current])
    return CompressedIndex(u, vocab, flat, forest, mode, cut_policy, rules=rules)


def sample_a(index: CompressedIndex, term: str, t: int) -> SampleArrayA:
    if t < 1:
        raise ConfigurationError("sampling period t must be >= 1")
    sums = index.phrase_sums(term)
    values = []
    s = 0
    for j, g in enumerate(sums):
        if j % t == 0:
            values.append(s)
        s += g
    if not values:
        values.append(0)
    return SampleArrayA(t, values)


def sample_b(index: CompressedIndex, term: str, B: int, k: int | None = None) -> SampleArrayB:
    e = index.entry(term)
    if k is None:
        k = bucket_shift(index.u, e.length, B)
    step = 1 << k
    values: list[int] = []
    offsets: list[int] = []
    s = 0
    for j, g in enumerate(index.phrase_sums(term), start=1):
        hi = s + g
        while len(values) * step <= hi:
            values.append(s)
            offsets.append(j)
        s = hi
    if not values:
        values, offsets = [0], [1]
    return SampleArrayB(k, values, offsets)


def space_model(index: CompressedIndex) -> dict[str, int]:
    """Model bits versus packed bits for dictionary plus C."""
    f = index.forest
    sigma = index.rules.alphabet_bound if index.rules else index.u
    n, l, d = len(index.C), f.bits, len(f.rs)
    sizes = index.size_breakdown()
    return {
        "model": model_bits(sigma, n, l, d),
        "packed": sizes["dictionary"] + sizes["sequence"],
        "slack": (d + n) * (index.width - symbol_bits(sigma, l)),
    }


def ceil_log2(x: float) -> int:
    return 0 if x <= 1 else math.ceil(math.log2(x))
