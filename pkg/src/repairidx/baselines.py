"""Competing list representations: plain arrays, byte codes, Rice codes, bitmaps.

Coded lists carry two optional samplings: ``(value, offset)`` pairs every
``k' = k * ceil(log2 l)`` elements for searching, and domain buckets of width
``2**k`` for direct lookup.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .corpus import PostingList, prefix_sums, to_gaps
from .errors import ConfigurationError, DecodeError, UnknownTermError
from .index import bucket_shift
from .packing import width_for


# ---------------------------------------------------------------- byte codes

def vbyte_encode(gaps: Sequence[int]) -> bytes:
    """7 data bits per byte, most significant group first; the high bit is set
    on every byte except the last of each code."""
    out = bytearray()
    for g in gaps:
        if g < 1:
            raise ValueError("gaps must be >= 1")
        groups = [g & 0x7F]
        g >>= 7
        while g:
            groups.append(0x80 | (g & 0x7F))
            g >>= 7
        out.extend(reversed(groups))
    return bytes(out)


def vbyte_read(data: bytes, pos: int) -> tuple[int, int]:
    v = 0
    n = len(data)
    while True:
        if pos >= n:
            raise DecodeError("truncated byte code")
        byte = data[pos]
        pos += 1
        v = (v << 7) | (byte & 0x7F)
        if byte < 0x80:
            return v, pos


def vbyte_decode(data: bytes, count: int, pos: int = 0) -> list[int]:
    out = []
    for _ in range(count):
        v, pos = vbyte_read(data, pos)
        out.append(v)
    return out


# ---------------------------------------------------------------- Rice codes

def rice_parameter(u: int, length: int) -> int:
    x = math.log(2) * u / max(length, 1)
    return max(0, math.floor(math.log2(x))) if x >= 1 else 0


def rice_encode(gaps: Sequence[int], b: int) -> bytearray:
    """Bits as a 0/1 bytearray: unary quotient of g-1 (ones ended by a zero),
    then its ``b`` low bits, most significant first."""
    out = bytearray()
    for g in gaps:
        if g < 1:
            raise ValueError("gaps must be >= 1")
        x = g - 1
        out.extend(b"\x01" * (x >> b))
        out.append(0)
        for i in range(b - 1, -1, -1):
            out.append((x >> i) & 1)
    return out


def rice_read(bits: bytearray, pos: int, b: int) -> tuple[int, int]:
    z = bits.find(0, pos)
    if z < 0:
        raise DecodeError("truncated Rice code (unary part)")
    q = z - pos
    pos = z + 1
    if pos + b > len(bits):
        raise DecodeError("truncated Rice code (binary part)")
    r = 0
    for i in range(pos, pos + b):
        r = (r << 1) | bits[i]
    return (q << b) + r + 1, pos + b


def rice_decode(bits: bytearray, b: int, count: int, pos: int = 0) -> list[int]:
    out = []
    for _ in range(count):
        g, pos = rice_read(bits, pos, b)
        out.append(g)
    return out


def rice_length(gaps: Sequence[int], b: int) -> int:
    return sum(((g - 1) >> b) + 1 + b for g in gaps)


# ---------------------------------------------------------------- coded lists

@dataclass
class CodedList:
    codec: str
    data: bytes | bytearray
    length: int
    b: int = 0
    kprime: int = 0
    # (value preceding element j*k'+1, offset of its code) for j = 0, 1, ...
    samples: list[tuple[int, int]] | None = None
    bucket_k: int = 0
    # per domain bucket: (value preceding first element >= start, its offset, its rank)
    buckets: list[tuple[int, int, int]] | None = None

    def read(self, pos: int) -> tuple[int, int]:
        if self.codec == "vbyte":
            return vbyte_read(self.data, pos)
        return rice_read(self.data, pos, self.b)

    def decode(self) -> list[int]:
        if self.codec == "vbyte":
            return prefix_sums(vbyte_decode(self.data, self.length))
        return prefix_sums(rice_decode(self.data, self.b, self.length))

    def stream_bits(self) -> int:
        return len(self.data) * (8 if self.codec == "vbyte" else 1)

    def access(self, v: int) -> int:
        """Element ``v`` (1-based) through the sample ceil(v/k')."""
        if not 1 <= v <= self.length:
            raise IndexError(v)
        j = (v - 1) // self.kprime
        value, pos = self.samples[j]
        for _ in range(v - j * self.kprime):
            g, pos = self.read(pos)
            value += g
        return value


def encode_list(codec: str, gaps: Sequence[int], u: int) -> CodedList:
    if codec == "vbyte":
        return CodedList("vbyte", vbyte_encode(gaps), len(gaps))
    if codec == "rice":
        b = rice_parameter(u, len(gaps))
        return CodedList("rice", rice_encode(gaps, b), len(gaps), b)
    raise ConfigurationError(f"unknown codec {codec!r}")


def sample_period(k: int, length: int) -> int:
    return max(1, k * math.ceil(math.log2(length))) if length > 1 else max(1, k)


def build_sampled(codec: str | CodedList, gaps: Sequence[int] | None = None, k: int = 1,
                  u: int | None = None) -> CodedList:
    """Attach (value, offset) samples every ``k' = k*ceil(log2 l)`` elements."""
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    cl = codec if isinstance(codec, CodedList) else encode_list(codec, gaps, u or sum(gaps))
    kp = sample_period(k, cl.length)
    samples = []
    pos = 0
    value = 0
    for i in range(cl.length):
        if i % kp == 0:
            samples.append((value, pos))
        g, pos = cl.read(pos)
        value += g
    if not samples:
        samples.append((0, 0))
    return replace(cl, kprime=kp, samples=samples)


def build_buckets(cl: CodedList, u: int, B: int) -> CodedList:
    k = bucket_shift(u, cl.length, B)
    step = 1 << k
    buckets: list[tuple[int, int, int]] = []
    pos = 0
    value = 0
    for i in range(cl.length):
        g, nxt = cl.read(pos)
        x = value + g
        while len(buckets) * step <= x:
            buckets.append((value, pos, i))
        value, pos = x, nxt
    if not buckets:
        buckets.append((0, 0, 0))
    return replace(cl, bucket_k=k, buckets=buckets)


# ---------------------------------------------------------------- indexes

@dataclass
class PlainIndex:
    u: int
    lists: dict[str, list[int]]

    method = "plain"
    sampling = None

    @property
    def terms(self) -> list[str]:
        return list(self.lists)

    def __contains__(self, term: str) -> bool:
        return term in self.lists

    def _get(self, term: str) -> list[int]:
        try:
            return self.lists[term]
        except KeyError:
            raise UnknownTermError(term) from None

    def length(self, term: str) -> int:
        return len(self._get(term))

    def decode(self, term: str) -> list[int]:
        return list(self._get(term))

    def view(self, term: str) -> list[int]:
        return self._get(term)

    def size_breakdown(self) -> dict[str, int]:
        w = width_for(self.u)
        return {"dictionary": 0, "sequence": sum(len(v) for v in self.lists.values()) * w,
                "samples": 0}


def build_plain(postings: Mapping[str, PostingList], u: int | None = None) -> PlainIndex:
    if u is None:
        u = max((pl.docs[-1] for pl in postings.values() if pl.docs), default=0)
    return PlainIndex(u, {t: list(pl.docs) for t, pl in postings.items()})


@dataclass
class CodedIndex:
    codec: str
    u: int
    lists: dict[str, CodedList]
    sampling: tuple[str, int] | None = None

    @property
    def method(self) -> str:
        return self.codec

    @property
    def terms(self) -> list[str]:
        return list(self.lists)

    def __contains__(self, term: str) -> bool:
        return term in self.lists

    def get(self, term: str) -> CodedList:
        try:
            return self.lists[term]
        except KeyError:
            raise UnknownTermError(term) from None

    def length(self, term: str) -> int:
        return self.get(term).length

    def decode(self, term: str) -> list[int]:
        return self.get(term).decode()

    def with_sampling(self, kind: str | None, param: int | None = None) -> "CodedIndex":
        bare = {t: replace(cl, kprime=0, samples=None, bucket_k=0, buckets=None)
                for t, cl in self.lists.items()}
        if kind in (None, "none"):
            return CodedIndex(self.codec, self.u, bare, None)
        if kind == "a":
            lists = {t: build_sampled(cl, k=param) for t, cl in bare.items()}
        elif kind == "b":
            lists = {t: build_buckets(cl, self.u, param) for t, cl in bare.items()}
        else:
            raise ConfigurationError(f"unknown sampling {kind!r}")
        return CodedIndex(self.codec, self.u, lists, (kind, int(param)))

    def size_breakdown(self) -> dict[str, int]:
        vbits = width_for(self.u)
        seq = 0
        samples = 0
        for cl in self.lists.values():
            sb = cl.stream_bits()
            seq += sb + (8 if self.codec == "rice" else 0)  # per-list Rice parameter
            obits = width_for(sb)
            if cl.samples:
                samples += len(cl.samples) * (vbits + obits)
            if cl.buckets:
                samples += len(cl.buckets) * (vbits + obits)
        return {"dictionary": 0, "sequence": seq, "samples": samples}


def build_coded(postings: Mapping[str, PostingList], codec: str, u: int | None = None,
                sampling: tuple[str, int] | None = None) -> CodedIndex:
    if u is None:
        u = max((pl.docs[-1] for pl in postings.values() if pl.docs), default=0)
    lists = {t: encode_list(codec, to_gaps(pl.docs), u) for t, pl in postings.items()}
    ix = CodedIndex(codec, u, lists)
    if sampling:
        ix = ix.with_sampling(*sampling)
    return ix


# ---------------------------------------------------------------- bitmaps

@dataclass
class BitmapList:
    bits: int  # bit p set iff document p is in the list
    u: int
    length: int

    def __contains__(self, p: int) -> bool:
        return (self.bits >> p) & 1 == 1

    def decode(self) -> list[int]:
        return bitmap_members(self.bits)


def bitmap_members(bits: int) -> list[int]:
    s = bin(bits)[:1:-1]
    out = []
    i = s.find("1")
    while i >= 0:
        out.append(i)
        i = s.find("1", i + 1)
    return out


def to_bitmap(docs: Sequence[int] | PostingList, u: int) -> BitmapList:
    if isinstance(docs, PostingList):
        docs = docs.docs
    for p in docs:
        if not 1 <= p <= u:
            raise ConfigurationError(f"document {p} outside [1, {u}]")
    bits = int.from_bytes(_bit_bytes(docs, u), "little")
    return BitmapList(bits, u, len(docs))


def _bit_bytes(docs: Sequence[int], u: int) -> bytes:
    buf = bytearray((u >> 3) + 1)
    for p in docs:
        buf[p >> 3] |= 1 << (p & 7)
    return bytes(buf)


def default_threshold(u: int) -> int:
    return max(1, -(-u // 8))


@dataclass
class HybridIndex:
    """Lists with at least ``tau`` elements as bitmaps, the rest in ``base``."""
    u: int
    tau: int
    base: object
    bitmaps: dict[str, BitmapList]
    order: list[str] = field(default_factory=list)

    @property
    def method(self) -> str:
        return f"hybrid-{self.base.method}"

    @property
    def sampling(self):
        return self.base.sampling

    @property
    def terms(self) -> list[str]:
        return list(self.order)

    def __contains__(self, term: str) -> bool:
        return term in self.bitmaps or term in self.base

    def is_bitmap(self, term: str) -> bool:
        return term in self.bitmaps

    def length(self, term: str) -> int:
        bm = self.bitmaps.get(term)
        return bm.length if bm is not None else self.base.length(term)

    def decode(self, term: str) -> list[int]:
        bm = self.bitmaps.get(term)
        return bm.decode() if bm is not None else self.base.decode(term)

    def with_sampling(self, kind, param=None) -> "HybridIndex":
        return replace(self, base=self.base.with_sampling(kind, param))

    def size_breakdown(self) -> dict[str, int]:
        sizes = dict(self.base.size_breakdown())
        sizes["sequence"] += len(self.bitmaps) * self.u
        return sizes


def split_hybrid(postings: Mapping[str, PostingList], u: int, tau: int | None = None):
    """Partition postings into (bitmap lists, coded lists) by the length threshold."""
    if tau is None:
        tau = default_threshold(u)
    long = {t: pl for t, pl in postings.items() if len(pl) >= tau}
    short = {t: pl for t, pl in postings.items() if len(pl) < tau}
    return tau, long, short


def hybrid_build(postings: Mapping[str, PostingList], u: int, tau: int | None = None,
                 base_builder=None) -> HybridIndex:
    """``base_builder(short_postings, u)`` builds the index for the coded lists;
    byte codes by default."""
    tau, long, short = split_hybrid(postings, u, tau)
    if base_builder is None:
        base_builder = lambda p, u: build_coded(p, "vbyte", u)  # noqa: E731
    base = base_builder(short, u)
    bitmaps = {t: to_bitmap(pl, u) for t, pl in long.items()}
    return HybridIndex(u, tau, base, bitmaps, list(postings))
