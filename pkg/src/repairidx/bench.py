"""Synthetic corpora, query-pair selection and the timing harness."""
from __future__ import annotations

import csv
import io
import math
import random
import statistics
import time
from bisect import bisect_left, bisect_right
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Mapping, Sequence

from .baselines import build_coded, build_plain, hybrid_build
from .corpus import PostingList, to_gaps
from .errors import ConfigurationError, OracleMismatch
from .grammar import optimize_cut, repair_compress
from .index import compress_index
from .intersect import merge_intersect, multi_intersect

DEFAULT_RATIOS = tuple(1 << i for i in range(11))  # bucket lower edges 1, 2, 4, ..., 1024


# ---------------------------------------------------------------- corpora

def gen_zipf_corpus(V: int, u: int, exponent: float = 1.0, seed: int = 0,
                    max_length: int | None = None) -> dict[str, PostingList]:
    """Term of rank r gets round(max_length * r**-exponent) documents (at least
    one, at most u), drawn uniformly without replacement."""
    if V < 1 or u < 1:
        raise ConfigurationError("V and u must be >= 1")
    top = u if max_length is None else min(u, max_length)
    rng = random.Random(seed)
    width = len(str(V))
    out = {}
    for r in range(1, V + 1):
        length = min(u, max(1, round(top * r ** -exponent)))
        term = f"w{r:0{width}d}"
        out[term] = PostingList(term, tuple(sorted(rng.sample(range(1, u + 1), length))))
    return out


def corpus_universe(postings: Mapping[str, PostingList]) -> int:
    return max((pl.docs[-1] for pl in postings.values() if pl.docs), default=0)


def gen_clustered(postings: Mapping[str, PostingList], factor: int = 8, seed: int = 0,
                  u: int | None = None) -> dict[str, PostingList]:
    """Terms are grouped ``factor`` at a time (by decreasing length); each group
    draws one sorted document block as long as its longest list, and every
    member takes a contiguous window of that block.  Members of a group thus
    share long runs of identical gaps."""
    if factor < 1:
        raise ConfigurationError("cluster factor must be >= 1")
    if u is None:
        u = corpus_universe(postings)
    rng = random.Random(seed)
    order = sorted(postings, key=lambda t: (-len(postings[t]), t))
    out = {}
    for g in range(0, len(order), factor):
        group = order[g:g + factor]
        size = len(postings[group[0]])
        block = sorted(rng.sample(range(1, u + 1), size))
        for t in group:
            length = len(postings[t])
            start = rng.randrange(size - length + 1)
            out[t] = PostingList(t, tuple(block[start:start + length]))
    return {t: out[t] for t in postings}


def shuffle_lists(postings: Mapping[str, PostingList], seed: int = 0,
                  u: int | None = None) -> dict[str, PostingList]:
    """Each list replaced by as many distinct uniform ids in [1, u]."""
    if u is None:
        u = corpus_universe(postings)
    rng = random.Random(seed)
    out = {}
    for t, pl in postings.items():
        if len(pl) > u:
            raise ConfigurationError(f"list {t!r} has {len(pl)} > u={u} elements")
        out[t] = PostingList(t, tuple(sorted(rng.sample(range(1, u + 1), len(pl)))))
    return out


def gap_bigrams(postings: Mapping[str, PostingList]) -> int:
    """Repeated adjacent gap pairs: occurrences beyond the first of each pair."""
    seen: dict[tuple[int, int], int] = {}
    for pl in postings.values():
        g = to_gaps(pl.docs)
        for a, b in zip(g, g[1:]):
            seen[a, b] = seen.get((a, b), 0) + 1
    return sum(c - 1 for c in seen.values())


# ---------------------------------------------------------------- query pairs

def ratio_bucket(ratio: float, edges: Sequence[int]) -> int | None:
    """Largest edge <= ratio; None when below the first edge."""
    i = bisect_right(edges, ratio)
    return edges[i - 1] if i else None


@dataclass
class QueryPair:
    short: str
    long: str
    bucket: int
    ratio: float


@dataclass
class QuerySet:
    pairs: list[QueryPair]
    band: tuple[int, int]
    requested: int
    shortfall: dict[int, int] = field(default_factory=dict)  # bucket -> pairs missing

    def by_bucket(self) -> dict[int, list[QueryPair]]:
        out: dict[int, list[QueryPair]] = {}
        for q in self.pairs:
            out.setdefault(q.bucket, []).append(q)
        return out

    def report(self) -> str:
        if not self.shortfall:
            return "all buckets filled"
        return "; ".join(f"ratio {b}: missing {n} of {self.requested}"
                         for b, n in sorted(self.shortfall.items()))


def pick_query_pairs(postings: Mapping[str, PostingList], ratios: Sequence[int] = DEFAULT_RATIOS,
                     band: tuple[int, int] | None = None, count: int = 100,
                     seed: int = 0, attempts: int = 50) -> QuerySet:
    """Sample up to ``count`` distinct pairs per ratio bucket.  The longer list
    lies in ``band`` (inclusive) and the bucket of a pair is the largest edge
    not above n/m."""
    edges = sorted(set(ratios))
    if not edges or edges[0] < 1:
        raise ConfigurationError("ratio bucket edges must be >= 1")
    terms = sorted(postings, key=lambda t: (len(postings[t]), t))
    lengths = [len(postings[t]) for t in terms]
    if band is None:
        band = (1, lengths[-1] if lengths else 0)
    lo, hi = band
    a0, b0 = bisect_left(lengths, lo), bisect_right(lengths, hi)
    longs, long_lengths = terms[a0:b0], lengths[a0:b0]
    rng = random.Random(seed)
    pairs: list[QueryPair] = []
    shortfall: dict[int, int] = {}
    for i, e in enumerate(edges):
        top = edges[i + 1] if i + 1 < len(edges) else math.inf
        got: dict[tuple[str, str], QueryPair] = {}
        # n/m >= e needs n >= e
        pool = longs[bisect_left(long_lengths, e):]
        for _ in range(attempts * count if pool else 0):
            if len(got) >= count:
                break
            lt = rng.choice(pool)
            n = len(postings[lt])
            # n/m in [e, top)  <=>  m in (n/top, n/e]
            a = bisect_right(lengths, n / top) if top != math.inf else bisect_left(lengths, 1)
            b = bisect_right(lengths, n / e)
            if a >= b:
                continue
            st = terms[rng.randrange(a, b)]
            if st == lt:
                continue
            key = (st, lt)
            if key not in got:
                got[key] = QueryPair(st, lt, e, n / len(postings[st]))
        if len(got) < count:
            shortfall[e] = count - len(got)
        pairs.extend(got[k] for k in sorted(got))
    return QuerySet(pairs, (lo, hi), count, shortfall)


# ---------------------------------------------------------------- methods

@dataclass
class BenchMethod:
    method: str       # representation tag
    strategy: str
    sampling: str     # "none", "a:T", "b:B"
    index: object


def parse_sampling(text: str | None) -> tuple[str, int] | None:
    if text in (None, "", "none"):
        return None
    kind, _, param = text.partition(":")
    if kind not in ("a", "b") or not param.isdigit() or int(param) < 1:
        raise ConfigurationError(f"sampling must be none, a:T or b:B, got {text!r}")
    return kind, int(param)


def sampling_label(sampling: tuple[str, int] | None) -> str:
    return "none" if not sampling else f"{sampling[0]}:{sampling[1]}"


def build_method(postings: Mapping[str, PostingList], u: int, method: str,
                 sampling: tuple[str, int] | None = None, **kw):
    """One index of the given representation."""
    if method == "plain":
        return build_plain(postings, u)
    if method in ("vbyte", "rice"):
        return build_coded(postings, method, u, sampling)
    if method in ("repair", "repair-nosums"):
        ix = compress_index(postings, u, with_sums=method == "repair", **kw)
        return ix.with_sampling(*sampling) if sampling else ix
    if method in ("hybrid", "bitmap-hybrid", "hybrid-vbyte", "hybrid-rice", "hybrid-repair"):
        base = {"hybrid-rice": "rice", "hybrid-repair": "repair"}.get(method, "vbyte")
        return hybrid_build(postings, u, kw.pop("tau", None),
                            lambda p, uu: build_method(p, uu, base, sampling, **kw))
    raise ConfigurationError(f"unknown method {method!r}")


def default_strategy(method: str, sampling: tuple[str, int] | None) -> str:
    if sampling and sampling[0] == "b":
        return "lookup"
    if sampling and sampling[0] == "a":
        return "svs-exp"
    if "repair" in method:
        return "skip"
    return "merge" if method != "plain" else "svs-exp"


def default_matrix(postings: Mapping[str, PostingList], u: int,
                   ts: Sequence[int] = (1, 4, 16), Bs: Sequence[int] = (8, 64, 256),
                   ks: Sequence[int] = (1, 4)) -> list[BenchMethod]:
    """Every representation under each of its strategies and sampling settings."""
    rows: list[BenchMethod] = []
    plain = build_plain(postings, u)
    for s in ("merge", "by", "svs-exp", "svs-bin"):
        rows.append(BenchMethod("plain", s, "none", plain))
    for codec in ("vbyte", "rice"):
        bare = build_coded(postings, codec, u)
        rows.append(BenchMethod(codec, "merge", "none", bare))
        for k in ks:
            rows.append(BenchMethod(codec, "svs-exp", f"a:{k}", bare.with_sampling("a", k)))
        for B in Bs:
            rows.append(BenchMethod(codec, "lookup", f"b:{B}", bare.with_sampling("b", B)))
    for tag in ("repair", "repair-nosums"):
        rp = compress_index(postings, u, with_sums=tag == "repair")
        rows.append(BenchMethod(tag, "skip", "none", rp))
        if tag == "repair-nosums":
            continue
        for t in ts:
            rows.append(BenchMethod(tag, "svs-exp", f"a:{t}", rp.with_sampling("a", t)))
        for B in Bs:
            rows.append(BenchMethod(tag, "lookup", f"b:{B}", rp.with_sampling("b", B)))
    hv = build_method(postings, u, "hybrid-vbyte", ("a", 1))
    rows.append(BenchMethod("hybrid-vbyte", "svs-exp", "a:1", hv))
    hr = build_method(postings, u, "hybrid-repair")
    rows.append(BenchMethod("hybrid-repair", "skip", "none", hr))
    return rows


# ---------------------------------------------------------------- timing

@dataclass
class BenchRecord:
    method: str
    sampling: str
    ratio_bucket: int
    band: str
    mean_ns: float
    median_ns: float
    total_bytes: int
    dict_bytes: int
    seq_bytes: int
    sample_bytes: int
    cardinality: int
    queries: int


def index_bytes(index) -> tuple[int, int, int, int]:
    sizes = index.size_breakdown()
    d, c, s = ((sizes[k] + 7) // 8 for k in ("dictionary", "sequence", "samples"))
    return d + c + s, d, c, s


def run_bench(methods: Sequence[BenchMethod], queries: QuerySet, reps: int = 10,
              oracle=None) -> list[BenchRecord]:
    """Verify every method on every query against merge, then time it.

    Per bucket and method, each repetition runs the whole bucket once; the
    mean and median of the per-query times over the repetitions are reported.
    """
    if reps < 1:
        raise ConfigurationError("repetitions must be >= 1")
    if oracle is None:
        oracle = methods[0].index if methods else None
    records: list[BenchRecord] = []
    band = f"{queries.band[0]}:{queries.band[1]}"
    for bucket, qs in sorted(queries.by_bucket().items()):
        expected = [merge_intersect(oracle.decode(q.short), oracle.decode(q.long)) for q in qs]
        for bm in methods:
            ix, strat = bm.index, bm.strategy
            for q, exp in zip(qs, expected):
                got = multi_intersect(ix, [q.short, q.long], strat)
                if got != exp:
                    raise OracleMismatch(
                        f"{bm.method}/{strat}/{bm.sampling} differs from merge on "
                        f"({q.short!r}, {q.long!r}): {len(got)} vs {len(exp)} results")
            times = []
            for _ in range(reps):
                t0 = time.perf_counter_ns()
                for q in qs:
                    multi_intersect(ix, [q.short, q.long], strat)
                times.append((time.perf_counter_ns() - t0) / len(qs))
            total, d, c, s = index_bytes(ix)
            label = f"{bm.method}/{bm.strategy}"
            records.append(BenchRecord(label, bm.sampling, bucket, band,
                                       statistics.fmean(times), statistics.median(times),
                                       total, d, c, s, sum(map(len, expected)), len(qs)))
    return records


def records_to_csv(records: Iterable[BenchRecord], out=None) -> str:
    buf = out if out is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(BenchRecord)])
    for r in records:
        row = asdict(r)
        row["mean_ns"] = f"{r.mean_ns:.1f}"
        row["median_ns"] = f"{r.median_ns:.1f}"
        w.writerow(row.values())
    return buf.getvalue() if out is None else ""


# ---------------------------------------------------------------- rule heights

@dataclass
class HeightRow:
    pack: int
    u: int
    longest: int
    height_all: int
    height_optimal: int

    @property
    def bound(self) -> float:
        return 4 * math.log2(self.longest) if self.longest > 1 else 0.0


def pack_postings(postings: Mapping[str, PostingList], pack: int) -> dict[str, PostingList]:
    """Merge each run of ``pack`` consecutive documents into one."""
    out = {}
    for t, pl in postings.items():
        docs = sorted({(d - 1) // pack + 1 for d in pl.docs})
        out[t] = PostingList(t, tuple(docs))
    return out


def grammar_heights(postings: Mapping[str, PostingList], mode: str = "exact") -> tuple[int, int]:
    """Max rule height with all rules and after the optimal cut."""
    seq: list[int] = []
    for i, pl in enumerate(postings.values()):
        seq.append(-(i + 1))
        seq.extend(to_gaps(pl.docs))
    C, rules = repair_compress(seq, mode)
    cut, _ = optimize_cut(rules, C, 1)
    h = rules.heights()
    return max(h, default=0), max(h[:cut], default=0)


def report_heights(postings: Mapping[str, PostingList], packings: Sequence[int] = (1, 2, 4, 8, 16, 32, 64, 128),
                   mode: str = "exact") -> list[HeightRow]:
    rows = []
    for p in packings:
        packed = pack_postings(postings, p)
        h_all, h_opt = grammar_heights(packed, mode)
        rows.append(HeightRow(p, corpus_universe(packed),
                              max((len(pl) for pl in packed.values()), default=0), h_all, h_opt))
    return rows


def format_heights(rows: Sequence[HeightRow]) -> str:
    lines = ["pack  u        longest  all  optimal  4log2(longest)"]
    for r in rows:
        lines.append(f"{r.pack:<5} {r.u:<8} {r.longest:<8} {r.height_all:<4} "
                     f"{r.height_optimal:<8} {r.bound:.1f}")
    return "\n".join(lines)
