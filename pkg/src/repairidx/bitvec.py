"""Plain bitmap with constant-time rank.

Positions are 1-indexed: ``rank0(i)`` counts zeros in ``bits[1..i]`` and
``access(i)`` returns the i-th bit.  The directory keeps absolute zero counts
per 512-bit superblock and relative counts per 64-bit block; the last step is
a popcount on a single word.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .packing import pack_bits, unpack_bits

SUPERBLOCK = 512
BLOCK = 64
_BLOCKS_PER_SUPER = SUPERBLOCK // BLOCK


def _pack_words(bits: Sequence[int]) -> list[int]:
    raw = pack_bits(bits)
    return [int.from_bytes(raw[i:i + 8], "little") for i in range(0, len(raw), 8)]


class RankBitmap:
    __slots__ = ("_bits", "_words", "_super", "_block", "length", "zeros")

    def __init__(self, bits: Iterable[int] = (), *, words: Sequence[int] | None = None,
                 length: int | None = None,
                 counters: tuple[Sequence[int], Sequence[int]] | None = None):
        if words is not None:
            if length is None:
                raise ValueError("length is required together with words")
            self._words = list(words)
            self.length = length
            raw = b"".join(w.to_bytes(8, "little") for w in self._words)
            self._bits = unpack_bits(raw, length)
        else:
            self._bits = bytearray(1 if b else 0 for b in bits)
            self.length = len(self._bits)
            self._words = _pack_words(self._bits)
        if counters is None:
            self._super, self._block = self._build_counters()
        else:
            self._super, self._block = list(counters[0]), list(counters[1])
        self.zeros = self.rank0(self.length)

    def _build_counters(self) -> tuple[list[int], list[int]]:
        supers: list[int] = []
        blocks: list[int] = []
        absolute = 0
        relative = 0
        # One entry per block start, including a trailing one at length.
        nblocks = self.length // BLOCK + 1
        for b in range(nblocks):
            if b % _BLOCKS_PER_SUPER == 0:
                absolute += relative
                relative = 0
                supers.append(absolute)
            blocks.append(relative)
            if b < len(self._words):
                width = min(BLOCK, self.length - b * BLOCK)
                relative += width - self._words[b].bit_count()
        return supers, blocks

    @property
    def counters(self) -> tuple[list[int], list[int]]:
        return self._super, self._block

    @property
    def words(self) -> list[int]:
        return self._words

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        return iter(self._bits)

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self._bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, RankBitmap) and self._bits == other._bits

    def rank0(self, i: int) -> int:
        if not 0 <= i <= self.length:
            raise IndexError(f"rank position {i} outside [0, {self.length}]")
        word, off = i >> 6, i & 63
        zeros = self._super[i >> 9] + self._block[word]
        if off:
            ones = (self._words[word] & ((1 << off) - 1)).bit_count()
            zeros += off - ones
        return zeros

    def rank1(self, i: int) -> int:
        return i - self.rank0(i)

    def access(self, i: int) -> int:
        if not 1 <= i <= self.length:
            raise IndexError(f"bit position {i} outside [1, {self.length}]")
        return self._bits[i - 1]

    def bit0(self, i0: int) -> int:
        """Unchecked 0-indexed access for hot loops."""
        return self._bits[i0]


def build_rank(bits: Iterable[int] | str) -> RankBitmap:
    if isinstance(bits, str):
        bits = [1 if c == "1" else 0 for c in bits if c in "01"]
    return RankBitmap(bits)
