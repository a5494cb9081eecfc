"""Corpus ingestion, posting lists and d-gaps."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InvariantViolation

WORD_RE = re.compile(r"[^\W_]+")
DEFAULT_SEPARATOR = "---"


@dataclass(frozen=True)
class PostingList:
    term: str
    docs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "docs", tuple(self.docs))
        prev = 0
        for d in self.docs:
            if d <= prev:
                raise InvariantViolation(
                    f"posting list {self.term!r} is not strictly increasing from 1")
            prev = d

    def __len__(self) -> int:
        return len(self.docs)


Postings = dict  # term -> PostingList, iteration order is the index order


def tokenize(text: str) -> list[str]:
    """Maximal runs of letters and digits, lowercased."""
    return [w.lower() for w in WORD_RE.findall(text)]


def parse_corpus(documents: Iterable[str], pack: int = 1) -> tuple[int, dict[str, PostingList]]:
    """Build postings from documents numbered 1..u in input order.

    ``pack`` merges each run of ``pack`` consecutive documents into one.
    Terms come out in lexicographic order.
    """
    if pack < 1:
        raise ValueError("pack must be >= 1")
    lists: dict[str, list[int]] = {}
    u = 0
    for i, text in enumerate(documents):
        doc = i // pack + 1
        u = doc
        for term in set(tokenize(text)):
            docs = lists.setdefault(term, [])
            if not docs or docs[-1] != doc:
                docs.append(doc)
    postings = {t: PostingList(t, tuple(sorted(lists[t]))) for t in sorted(lists)}
    return u, postings


def read_documents(path: str | Path, separator: str = DEFAULT_SEPARATOR) -> list[str]:
    """A directory yields one document per file (sorted by name); a file is
    split on lines equal to ``separator``."""
    path = Path(path)
    if path.is_dir():
        return [p.read_text(encoding="utf-8", errors="replace")
                for p in sorted(path.iterdir()) if p.is_file()]
    docs: list[str] = []
    cur: list[str] = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            if line.rstrip("\r\n") == separator:
                docs.append("".join(cur))
                cur = []
            else:
                cur.append(line)
    if cur or not docs:
        docs.append("".join(cur))
    return docs


def write_documents(path: str | Path, u: int, postings: dict[str, PostingList],
                    separator: str = DEFAULT_SEPARATOR) -> None:
    """Write postings back as a separator-delimited corpus of ``u`` documents."""
    docs: list[list[str]] = [[] for _ in range(u)]
    for term, pl in postings.items():
        for d in pl.docs:
            docs[d - 1].append(term)
    with open(path, "w", encoding="utf-8") as fh:
        for i, words in enumerate(docs):
            if i:
                fh.write(separator + "\n")
            fh.write(" ".join(words) + "\n")


def to_gaps(docs: Sequence[int] | PostingList) -> list[int]:
    if isinstance(docs, PostingList):
        docs = docs.docs
    gaps = []
    prev = 0
    for d in docs:
        if d <= prev:
            raise InvariantViolation("document ids must be strictly increasing and >= 1")
        gaps.append(d - prev)
        prev = d
    return gaps


def from_gaps(gaps: Iterable[int], term: str = "", base: int = 0) -> PostingList:
    docs = []
    s = base
    for g in gaps:
        if g < 1:
            raise InvariantViolation("gaps must be >= 1")
        s += g
        docs.append(s)
    return PostingList(term, tuple(docs))


def prefix_sums(gaps: Iterable[int], base: int = 0) -> list[int]:
    out = []
    s = base
    for g in gaps:
        s += g
        out.append(s)
    return out
