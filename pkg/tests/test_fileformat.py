import random
import struct

import pytest

from repairidx.bench import build_method, gen_zipf_corpus
from repairidx.errors import FormatError
from repairidx.fileformat import (MAGIC, deserialize, deserialize_bytes, section_sizes, serialize,
                                  serialize_bytes)
from repairidx.intersect import multi_intersect

from conftest import fig1_postings

METHODS = ["plain", "vbyte", "rice", "repair", "repair-nosums", "hybrid-vbyte", "hybrid-repair"]


def test_fig1_header(fig1_index):
    data = serialize_bytes(fig1_index)
    assert data[:4] == MAGIC
    version, u, nvocab, flags, width = struct.unpack_from("<IQIIB", data, 4)
    assert (version, u, nvocab) == (1, 11, 3)
    assert flags == 1 << 4  # repair, with sums, exact, all rules, no sampling
    assert width == (11 + 11).bit_length()


def test_fig1_roundtrip_byte_identical(tmp_path, fig1_index):
    path = tmp_path / "fig1.rpi"
    n = serialize(fig1_index, path)
    back = deserialize(path)
    assert back.C == fig1_index.C
    assert back.forest == fig1_index.forest
    assert back.vocab == fig1_index.vocab
    assert serialize_bytes(back) == path.read_bytes()
    assert n == path.stat().st_size == sum(section_sizes(fig1_index).values())


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("sampling", [None, ("a", 3), ("b", 16)])
def test_500_terms_query_equivalence(method, sampling):
    if method == "plain" and sampling:
        pytest.skip("plain lists carry no sampling")
    p = gen_zipf_corpus(500, 700, 1.0, seed=5)
    ix = build_method(p, 700, method, sampling)
    data = serialize_bytes(ix)
    back = deserialize_bytes(data)
    assert serialize_bytes(back) == data
    rng = random.Random(1)
    terms = list(p)
    strat = {"a": "svs-exp", "b": "lookup"}[sampling[0]] if sampling else "merge"
    for _ in range(100):
        q = rng.sample(terms, rng.randint(1, 3))
        assert multi_intersect(back, q, strat) == multi_intersect(ix, q, strat)


def test_corrupted_magic(fig1_index):
    data = bytearray(serialize_bytes(fig1_index))
    data[0] = ord("X")
    with pytest.raises(FormatError) as err:
        deserialize_bytes(bytes(data))
    assert err.value.section == "header"


def test_version_mismatch(fig1_index):
    data = bytearray(serialize_bytes(fig1_index))
    data[4] = 9
    with pytest.raises(FormatError, match="version"):
        deserialize_bytes(bytes(data))


def test_truncation_names_section(fig1_index):
    data = serialize_bytes(fig1_index)
    sizes = section_sizes(fig1_index)
    cut_points = {"header": 10, "vocab": sizes["header"] + 5,
                  "dictionary": sizes["header"] + sizes["vocab"] + 3}
    for section, cut in cut_points.items():
        with pytest.raises(FormatError) as err:
            deserialize_bytes(data[:cut])
        assert err.value.section == section
    with pytest.raises(FormatError) as err:
        deserialize_bytes(data + b"\x00")
    assert "trailing" in str(err.value)


def test_every_truncation_is_a_format_error():
    p = fig1_postings()
    for method in METHODS:
        data = serialize_bytes(build_method(p, 11, method, ("b", 2) if method != "plain" else None))
        for cut in range(len(data)):
            with pytest.raises(FormatError):
                deserialize_bytes(data[:cut])


def test_corrupted_symbol_detected(fig1_index):
    data = bytearray(serialize_bytes(fig1_index))
    start = len(data) - section_sizes(fig1_index)["samples"] - 8
    data[start:start + 8] = b"\xff" * 8  # packed C words: symbols above u + |R_B|
    with pytest.raises(FormatError) as err:
        deserialize_bytes(bytes(data))
    assert err.value.section == "sequence"


def test_rank_directory_checked(fig1_index):
    data = bytearray(serialize_bytes(fig1_index))
    sizes = section_sizes(fig1_index)
    off = sizes["header"] + sizes["vocab"] + 8  # R_B payload word
    data[off] ^= 0x01
    with pytest.raises(FormatError) as err:
        deserialize_bytes(bytes(data))
    assert err.value.section == "dictionary"


def test_unknown_object():
    with pytest.raises(TypeError):
        serialize_bytes(object())
