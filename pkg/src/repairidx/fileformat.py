"""The RPI1 container: little-endian, fixed-width packed integer arrays.

Layout::

    header   magic "RPI1", version u32, u u64, vocab count u32, flags u32, width u8
    vocab    per term: u16 byte length + UTF-8, length u64, pointer u64
    body     depends on the method in the flags (see the writers below)
    samples  sampling kind u8, parameter u32, then per-list arrays

Every packed array is padded to 64-bit words.  The flags word holds the
method code in bits 0-3, with sums (bit 4), approximate mode (bit 5), optimal
cut (bit 6) and the sampling kind in bits 8-9.
"""
from __future__ import annotations

import struct
from pathlib import Path

from .baselines import BitmapList, CodedIndex, CodedList, HybridIndex, PlainIndex
from .bitvec import RankBitmap
from .errors import FormatError
from .grammar import GrammarForest
from .index import CompressedIndex, SampleArrayA, SampleArrayB, VocabEntry
from .packing import pack, pack_bits, packed_size, unpack, unpack_bits, width_for

MAGIC = b"RPI1"
VERSION = 1
METHODS = {"repair": 0, "vbyte": 1, "rice": 2, "plain": 3, "hybrid": 4}
METHOD_NAMES = {v: k for k, v in METHODS.items()}
SAMPLING_CODES = {None: 0, "a": 1, "b": 2}
SAMPLING_KINDS = {v: k for k, v in SAMPLING_CODES.items()}
F_SUMS, F_APPROX, F_OPTIMAL = 1 << 4, 1 << 5, 1 << 6


# ---------------------------------------------------------------- writing

class _Writer:
    def __init__(self):
        self.sections: list[tuple[str, bytearray]] = []

    def section(self, name: str) -> bytearray:
        buf = bytearray()
        self.sections.append((name, buf))
        return buf

    def data(self) -> bytes:
        return b"".join(bytes(b) for _, b in self.sections)


def _u8(buf, v): buf += struct.pack("<B", v)
def _u16(buf, v): buf += struct.pack("<H", v)
def _u32(buf, v): buf += struct.pack("<I", v)
def _u64(buf, v): buf += struct.pack("<Q", v)


def _array(buf: bytearray, values, width: int) -> None:
    """count u64, then the packed values."""
    _u64(buf, len(values))
    buf += pack(values, width)


def _term(buf: bytearray, term: str) -> None:
    raw = term.encode("utf-8")
    _u16(buf, len(raw))
    buf += raw


def _header(buf, u, nvocab, flags, width):
    buf += MAGIC
    _u32(buf, VERSION)
    _u64(buf, u)
    _u32(buf, nvocab)
    _u32(buf, flags)
    _u8(buf, width)


def _sampling_flags(sampling) -> int:
    return SAMPLING_CODES[sampling[0] if sampling else None] << 8


def _write_repair(w: _Writer, ix: CompressedIndex) -> None:
    f = ix.forest
    width = ix.width
    flags = METHODS["repair"] | _sampling_flags(ix.sampling)
    flags |= F_SUMS if f.with_sums else 0
    flags |= F_APPROX if ix.mode == "approximate" else 0
    flags |= F_OPTIMAL if ix.cut_policy == "optimal" else 0
    _header(w.section("header"), ix.u, len(ix.vocab), flags, width)
    voc = w.section("vocab")
    for term, e in ix.vocab.items():
        _term(voc, term)
        _u64(voc, e.length)
        _u64(voc, e.pointer)
    fb = w.section("dictionary")
    _u64(fb, len(f.rb))
    for word in f.rb.words:
        _u64(fb, word)
    sup, blk = f.rb.counters
    _u8(fb, 1)  # rank directory present
    for counts in (sup, blk):
        wd = width_for(max(counts, default=0))
        _u8(fb, wd)
        _array(fb, counts, wd)
    _array(fb, f.rs, width)
    _array(w.section("sequence"), ix.C, width)
    sb = w.section("samples")
    if ix.sampling:
        kind, param = ix.sampling
        _u8(sb, SAMPLING_CODES[kind])
        _u32(sb, param)
        vbits = width_for(ix.u)
        for term in ix.vocab:
            smp = ix.samples[term]
            if kind == "a":
                _array(sb, smp.values, vbits)
            else:
                _u8(sb, smp.k)
                _array(sb, smp.values, vbits)
                _array(sb, smp.offsets, width_for(ix.vocab[term].clen + 1))


def _write_plain(w: _Writer, ix: PlainIndex) -> None:
    width = width_for(ix.u)
    _header(w.section("header"), ix.u, len(ix.lists), METHODS["plain"], width)
    voc = w.section("vocab")
    flat: list[int] = []
    for term, docs in ix.lists.items():
        _term(voc, term)
        _u64(voc, len(docs))
        _u64(voc, len(flat))
        flat.extend(docs)
    _array(w.section("sequence"), flat, width)
    w.section("samples")


def _write_coded(w: _Writer, ix: CodedIndex) -> None:
    vbyte = ix.codec == "vbyte"
    flags = METHODS[ix.codec] | _sampling_flags(ix.sampling)
    _header(w.section("header"), ix.u, len(ix.lists), flags, 0)
    voc = w.section("vocab")
    stream = bytearray()
    for term, cl in ix.lists.items():
        _term(voc, term)
        _u64(voc, cl.length)
        _u64(voc, len(stream))
        stream += cl.data
    seq = w.section("sequence")
    if not vbyte:
        for cl in ix.lists.values():
            _u8(seq, cl.b)
    _u64(seq, len(stream))
    seq += stream if vbyte else pack_bits(stream)
    seq += b"\x00" * (-len(stream) % 8) if vbyte else b""
    sb = w.section("samples")
    if ix.sampling:
        kind, param = ix.sampling
        _u8(sb, SAMPLING_CODES[kind])
        _u32(sb, param)
        vbits = width_for(ix.u)
        for cl in ix.lists.values():
            obits = width_for(len(cl.data))
            if kind == "a":
                _u64(sb, cl.kprime)
                _array(sb, [v for v, _ in cl.samples], vbits)
                _array(sb, [o for _, o in cl.samples], obits)
            else:
                _u8(sb, cl.bucket_k)
                _array(sb, [v for v, _, _ in cl.buckets], vbits)
                _array(sb, [o for _, o, _ in cl.buckets], obits)
                _array(sb, [r for _, _, r in cl.buckets], width_for(cl.length))


def _write_hybrid(w: _Writer, ix: HybridIndex) -> None:
    flags = METHODS["hybrid"] | _sampling_flags(ix.sampling)
    _header(w.section("header"), ix.u, len(ix.bitmaps), flags, 0)
    voc = w.section("vocab")
    for term, bm in ix.bitmaps.items():
        _term(voc, term)
        _u64(voc, bm.length)
        _u64(voc, 0)
    seq = w.section("sequence")
    _u64(seq, ix.tau)
    nbytes = packed_size(ix.u + 1, 1)
    for bm in ix.bitmaps.values():
        seq += bm.bits.to_bytes(nbytes, "little")
    order = w.section("order")
    _u32(order, len(ix.order))
    for term in ix.order:
        _term(order, term)
    base = serialize_bytes(ix.base)
    b = w.section("base")
    _u64(b, len(base))
    b += base


def _writer_for(index) -> _Writer:
    w = _Writer()
    if isinstance(index, CompressedIndex):
        _write_repair(w, index)
    elif isinstance(index, CodedIndex):
        _write_coded(w, index)
    elif isinstance(index, PlainIndex):
        _write_plain(w, index)
    elif isinstance(index, HybridIndex):
        _write_hybrid(w, index)
    else:
        raise TypeError(f"cannot serialize {type(index).__name__}")
    return w


def serialize_bytes(index) -> bytes:
    return _writer_for(index).data()


def serialize(index, path: str | Path) -> int:
    data = serialize_bytes(index)
    Path(path).write_bytes(data)
    return len(data)


def section_sizes(index) -> dict[str, int]:
    """Bytes per file section."""
    out: dict[str, int] = {}
    for name, buf in _writer_for(index).sections:
        out[name] = out.get(name, 0) + len(buf)
    return out


# ---------------------------------------------------------------- reading

class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0
        self.section = "header"

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(self.section, "truncated")
        out = bytes(self.data[self.pos:self.pos + n])
        self.pos += n
        return out

    def u8(self): return self.take(1)[0]
    def u16(self): return struct.unpack("<H", self.take(2))[0]
    def u32(self): return struct.unpack("<I", self.take(4))[0]
    def u64(self): return struct.unpack("<Q", self.take(8))[0]

    def array(self, width: int) -> list[int]:
        n = self.u64()
        return unpack(self.take(packed_size(n, width)), n, width)

    def term(self) -> str:
        raw = self.take(self.u16())
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError(self.section, "term is not valid UTF-8") from None


def _read_header(r: _Reader):
    if r.take(4) != MAGIC:
        raise FormatError("header", "bad magic")
    version = r.u32()
    if version != VERSION:
        raise FormatError("header", f"unsupported version {version}")
    u = r.u64()
    nvocab = r.u32()
    flags = r.u32()
    width = r.u8()
    if (flags & 0xF) not in METHOD_NAMES:
        raise FormatError("header", f"unknown method code {flags & 0xF}")
    if (flags >> 8) & 3 not in SAMPLING_KINDS:
        raise FormatError("header", "unknown sampling kind")
    return u, nvocab, flags, width


def _read_vocab(r: _Reader, n: int) -> list[tuple[str, int, int]]:
    r.section = "vocab"
    return [(r.term(), r.u64(), r.u64()) for _ in range(n)]


def _read_sampling_head(r: _Reader, flags: int):
    r.section = "samples"
    kind = SAMPLING_KINDS[(flags >> 8) & 3]
    if kind is None:
        return None
    code = r.u8()
    if SAMPLING_KINDS.get(code) != kind:
        raise FormatError("samples", "sampling kind differs from the header")
    return kind, r.u32()


def _read_repair(r: _Reader, u, vocab, flags, width) -> CompressedIndex:
    r.section = "dictionary"
    nbits = r.u64()
    words = [r.u64() for _ in range((nbits + 63) // 64)]
    if r.u8() != 1:
        raise FormatError("dictionary", "rank directory missing")
    sup = r.array(r.u8())
    blk = r.array(r.u8())
    rb = RankBitmap(words=words, length=nbits)
    if (sup, blk) != tuple(map(list, rb.counters)):
        raise FormatError("dictionary", "rank directory does not match R_B")
    rs = r.array(width)
    try:
        forest = GrammarForest(rb, rs, bool(flags & F_SUMS), u)
    except Exception as exc:
        raise FormatError("dictionary", str(exc)) from None
    if width != width_for(u + nbits):
        raise FormatError("header", "symbol width does not match u and |R_B|")
    r.section = "sequence"
    C = r.array(width)
    limit = u + nbits
    if any(v < 1 or v > limit for v in C):
        raise FormatError("sequence", "symbol out of range")
    entries: dict[str, VocabEntry] = {}
    for i, (term, length, ptr) in enumerate(vocab):
        nxt = vocab[i + 1][2] if i + 1 < len(vocab) else len(C)
        if not ptr <= nxt <= len(C):
            raise FormatError("vocab", f"pointer of {term!r} out of order")
        entries[term] = VocabEntry(ptr, nxt - ptr, length)
    mode = "approximate" if flags & F_APPROX else "exact"
    cut = "optimal" if flags & F_OPTIMAL else "all"
    ix = CompressedIndex(u, entries, C, forest, mode, cut)
    sampling = _read_sampling_head(r, flags)
    if sampling:
        kind, param = sampling
        vbits = width_for(u)
        samples = {}
        for term, e in entries.items():
            if kind == "a":
                samples[term] = SampleArrayA(param, r.array(vbits))
            else:
                k = r.u8()
                samples[term] = SampleArrayB(k, r.array(vbits), r.array(width_for(e.clen + 1)))
        ix.sampling = sampling
        ix.samples = samples
    return ix


def _read_plain(r: _Reader, u, vocab, flags, width) -> PlainIndex:
    r.section = "sequence"
    flat = r.array(width)
    lists = {}
    for i, (term, length, ptr) in enumerate(vocab):
        if ptr + length > len(flat):
            raise FormatError("vocab", f"list {term!r} out of range")
        lists[term] = flat[ptr:ptr + length]
    _read_sampling_head(r, flags)
    return PlainIndex(u, lists)


def _read_coded(r: _Reader, u, vocab, flags, width) -> CodedIndex:
    codec = METHOD_NAMES[flags & 0xF]
    vbyte = codec == "vbyte"
    r.section = "sequence"
    params = [] if vbyte else [r.u8() for _ in vocab]
    n = r.u64()
    if vbyte:
        stream = r.take(n)
        r.take(-n % 8)
    else:
        stream = unpack_bits(r.take(packed_size(n, 1)), n)
    lists: dict[str, CodedList] = {}
    for i, (term, length, ptr) in enumerate(vocab):
        nxt = vocab[i + 1][2] if i + 1 < len(vocab) else n
        if not ptr <= nxt <= n:
            raise FormatError("vocab", f"pointer of {term!r} out of order")
        data = stream[ptr:nxt]
        lists[term] = CodedList(codec, bytes(data) if vbyte else bytearray(data), length,
                                0 if vbyte else params[i])
    sampling = _read_sampling_head(r, flags)
    if sampling:
        kind, _ = sampling
        vbits = width_for(u)
        for term, cl in lists.items():
            obits = width_for(len(cl.data))
            if kind == "a":
                kp = r.u64()
                vals, offs = r.array(vbits), r.array(obits)
                cl.kprime, cl.samples = kp, list(zip(vals, offs))
            else:
                cl.bucket_k = r.u8()
                vals, offs, ranks = r.array(vbits), r.array(obits), r.array(width_for(cl.length))
                cl.buckets = list(zip(vals, offs, ranks))
    return CodedIndex(codec, u, lists, sampling)


def _read_hybrid(r: _Reader, u, vocab, flags, width) -> HybridIndex:
    r.section = "sequence"
    tau = r.u64()
    nbytes = packed_size(u + 1, 1)
    bitmaps = {term: BitmapList(int.from_bytes(r.take(nbytes), "little"), u, length)
               for term, length, _ in vocab}
    r.section = "order"
    order = [r.term() for _ in range(r.u32())]
    r.section = "base"
    base = deserialize_bytes(r.take(r.u64()))
    return HybridIndex(u, tau, base, bitmaps, order)


_READERS = {"repair": _read_repair, "vbyte": _read_coded, "rice": _read_coded,
            "plain": _read_plain, "hybrid": _read_hybrid}


def deserialize_bytes(data: bytes):
    r = _Reader(data)
    u, nvocab, flags, width = _read_header(r)
    vocab = _read_vocab(r, nvocab)
    index = _READERS[METHOD_NAMES[flags & 0xF]](r, u, vocab, flags, width)
    if r.pos != len(r.data):
        raise FormatError(r.section, "trailing bytes after the last section")
    return index


def deserialize(path: str | Path):
    return deserialize_bytes(Path(path).read_bytes())
