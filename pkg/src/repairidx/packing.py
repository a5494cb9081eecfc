"""Fixed-width little-endian bit packing of integer arrays."""
from __future__ import annotations

from typing import Sequence

import numpy as np


def width_for(max_value: int) -> int:
    return max(1, int(max_value).bit_length())


def pack(values: Sequence[int], width: int) -> bytes:
    """Pack ``values`` at ``width`` bits each, LSB-first, padded to 64-bit words."""
    n = len(values)
    if n == 0:
        return b""
    if width > 63:
        raise ValueError("width above 63 bits is not supported")
    arr = np.asarray(values, dtype=np.uint64)
    shifts = np.arange(width, dtype=np.uint64)
    bits = ((arr[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).ravel()
    raw = np.packbits(bits, bitorder="little").tobytes()
    return raw + b"\x00" * (-len(raw) % 8)


def packed_size(count: int, width: int) -> int:
    nbits = count * width
    return ((nbits + 63) // 64) * 8


def unpack(data: bytes, count: int, width: int) -> list[int]:
    if count == 0:
        return []
    need = (count * width + 7) // 8
    if len(data) < need:
        raise ValueError("packed data truncated")
    bits = np.unpackbits(np.frombuffer(data[:need], dtype=np.uint8), bitorder="little")
    bits = bits[:count * width].reshape(count, width).astype(np.uint64)
    weights = np.uint64(1) << np.arange(width, dtype=np.uint64)
    return (bits * weights).sum(axis=1, dtype=np.uint64).tolist()


def pack_bits(bits: Sequence[int]) -> bytes:
    """Pack a 0/1 sequence LSB-first into 64-bit padded words."""
    if len(bits) == 0:
        return b""
    raw = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()
    return raw + b"\x00" * (-len(raw) % 8)


def unpack_bits(data: bytes, count: int) -> bytearray:
    if count == 0:
        return bytearray()
    need = (count + 7) // 8
    if len(data) < need:
        raise ValueError("bit payload truncated")
    bits = np.unpackbits(np.frombuffer(data[:need], dtype=np.uint8), bitorder="little")
    return bytearray(bits[:count].tobytes())
