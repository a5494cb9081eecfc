"""List intersection over plain, byte/Rice coded, Re-Pair and hybrid indexes.

Positions in plain lists are 0-based.  All intersections take the candidate
(the shorter list, uncompressed) and search for its elements in a stored list.

Re-Pair lists are searched by phrase skipping: each symbol of the list
segment contributes its phrase sum to a running total ``s`` until the total
passes the candidate, and only the phrase that brackets it is descended.
``TouchCounter`` records how many grammar symbols were visited (C entries,
forest children and sample probes).
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence

from .baselines import CodedIndex, CodedList, HybridIndex, PlainIndex, bitmap_members
from .errors import ConfigurationError, UnknownTermError
from .index import CompressedIndex, SampleArrayA, SampleArrayB

PLAIN_STRATEGIES = ("merge", "by", "svs-seq", "svs-bin", "svs-exp")
CODED_STRATEGIES = ("merge", "svs-seq", "svs-bin", "svs-exp", "lookup")
REPAIR_STRATEGIES = ("merge", "skip", "skip-member", "svs-seq", "svs-bin", "svs-exp", "lookup")


class TouchCounter:
    __slots__ = ("touches",)

    def __init__(self):
        self.touches = 0


@dataclass
class SkipCursor:
    """Resume point in a list segment: offset of the next unconsumed symbol
    and the sum of all gaps before it."""
    pos: int = 0
    s: int = 0


# ---------------------------------------------------------------- plain lists

def merge_intersect(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return out


def exp_search(view: Sequence[int], start: int, target: int) -> int:
    """Smallest index ``>= start`` holding a value ``>= target``; ``len(view)``
    when there is none.  Gallops over ``start + 2**j - 1`` then bisects."""
    n = len(view)
    if start >= n or view[start] >= target:
        return start
    lo = start  # view[lo] < target
    step = 1
    while lo + step < n and view[lo + step] < target:
        lo += step
        step <<= 1
    return bisect_left(view, target, lo + 1, min(lo + step, n))


def svs_intersect(candidate: Sequence[int], longer: Sequence[int], search: str = "exp") -> list[int]:
    out = []
    pos = 0
    n = len(longer)
    for x in candidate:
        if search == "exp":
            pos = exp_search(longer, pos, x)
        elif search == "bin":
            pos = bisect_left(longer, x, pos)
        elif search == "seq":
            while pos < n and longer[pos] < x:
                pos += 1
        else:
            raise ConfigurationError(f"unknown search {search!r}")
        if pos >= n:
            break
        if longer[pos] == x:
            out.append(x)
            pos += 1
    return out


def by_intersect(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Median split: search the median of the shorter side in the longer one,
    recurse on both halves."""
    out: list[int] = []

    def rec(a, alo, ahi, b, blo, bhi):
        if alo >= ahi or blo >= bhi:
            return
        if ahi - alo > bhi - blo:
            # results from either side come out in the same sorted order
            a, alo, ahi, b, blo, bhi = b, blo, bhi, a, alo, ahi
        mid = (alo + ahi) // 2
        x = a[mid]
        pos = bisect_left(b, x, blo, bhi)
        found = pos < bhi and b[pos] == x
        rec(a, alo, mid, b, blo, pos)
        if found:
            out.append(x)
        rec(a, mid + 1, ahi, b, pos + found, bhi)

    rec(a, 0, len(a), b, 0, len(b))
    return out


# ---------------------------------------------------------------- samples

def _last_below(values: Sequence[int], lo: int, x: int, search: str, counter) -> int:
    """Largest index ``>= lo`` with ``values[idx] < x``; ``values[lo] < x``."""
    n = len(values)
    probes = 0
    if search == "seq":
        while lo + 1 < n and values[lo + 1] < x:
            lo += 1
            probes += 1
        probes += 1
    else:
        if search == "exp":
            step = 1
            while lo + step < n and values[lo + step] < x:
                lo += step
                step <<= 1
                probes += 1
            probes += 1
            hi = min(lo + step, n)
        elif search == "bin":
            hi = n
        else:
            raise ConfigurationError(f"unknown search {search!r}")
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            probes += 1
            if values[mid] < x:
                lo = mid
            else:
                hi = mid
    if counter is not None:
        counter.touches += probes
    return lo


# ---------------------------------------------------------------- coded lists

def svs_coded(candidate: Sequence[int], cl: CodedList, search: str = "exp") -> list[int]:
    """Search sample values for the block of each candidate, then decode inside
    the block, resuming where the previous candidate stopped."""
    if cl.samples is None:
        raise ConfigurationError("svs over a coded list needs (a)-sampling")
    values = [v for v, _ in cl.samples]
    read = cl.read
    kp = cl.kprime
    out = []
    j = 0
    block = -1
    val = pos = rem = 0
    for x in candidate:
        j = _last_below(values, j, x, search, None)
        if j != block:
            block = j
            val, pos = cl.samples[j]
            rem = min(kp, cl.length - j * kp)
        while val < x and rem:
            g, pos = read(pos)
            val += g
            rem -= 1
        if val == x:
            out.append(x)
        elif val < x:
            break  # last block exhausted
    return out


def lookup_coded(candidate: Sequence[int], cl: CodedList) -> list[int]:
    """Jump to the domain bucket of each candidate; decode progress is kept
    for the whole query so no code is decoded twice."""
    if cl.buckets is None:
        raise ConfigurationError("lookup over a coded list needs (b)-sampling")
    read = cl.read
    k = cl.bucket_k
    buckets = cl.buckets
    nb = len(buckets)
    n = cl.length
    out = []
    val = pos = done = 0
    started = False
    for x in candidate:
        i = x >> k
        if i >= nb:
            break
        bval, bpos, brank = buckets[i]
        if not started or brank > done:
            val, pos, done = bval, bpos, brank
            started = True
        while val < x and done < n:
            g, pos = read(pos)
            val += g
            done += 1
        if val == x:
            out.append(x)
        elif val < x:
            break
    return out


# ---------------------------------------------------------------- Re-Pair lists

def _sum_function(forest) -> Callable[[int], int]:
    shift = forest.shift
    if forest.with_sums:
        rs = forest.rs

        def sum_of(v):
            return v if v <= shift else rs[v - shift - 1]
        return sum_of
    return forest.phrase_sum


def skip_member(index: CompressedIndex, term: str, cursor: SkipCursor | None, d: int,
                trace: Callable[[int], None] | None = None,
                counter: TouchCounter | None = None) -> tuple[bool, SkipCursor]:
    """Is ``d`` in the list?  Accumulates phrase sums from ``cursor``; on
    overshoot by a nonterminal, restarts from the sum before it and descends
    its children, skipping those that end before ``d``.

    ``trace`` receives every value the running sum takes, restarts included.
    The returned cursor points at the phrase holding or following ``d``.
    """
    e = index.entry(term)
    if cursor is None:
        cursor = SkipCursor()
    forest = index.forest
    shift = forest.shift
    sum_of = _sum_function(forest)
    left, right = forest._left, forest._right
    C = index.C
    start, end = e.pointer, e.pointer + e.clen
    pos = start + cursor.pos
    s = cursor.s
    touches = 0
    found = False
    while pos < end:
        v = C[pos]
        touches += 1
        g = sum_of(v)
        if trace:
            trace(s + g)
        if s + g == d:
            found = True
            s += g
            pos += 1
            break
        if s + g < d:
            s += g
            pos += 1
            continue
        if v > shift:
            if trace:
                trace(s)
            t = s
            node = v
            while node > shift and not found:
                p = node - shift
                nxt = None
                for child in (left[p], right[p]):
                    touches += 1
                    g = sum_of(child)
                    if trace:
                        trace(t + g)
                    if t + g == d:
                        found = True
                        break
                    if t + g > d:
                        nxt = child
                        break
                    t += g
                if found or nxt is None or nxt <= shift:
                    break
                if trace:
                    trace(t)
                node = nxt
        break
    if counter is not None:
        counter.touches += touches
    return found, SkipCursor(pos - start, s)


def skip_intersect(candidate: Sequence[int], index: CompressedIndex, term: str,
                   counter: TouchCounter | None = None) -> list[int]:
    """One skip_member call per candidate, keeping the cursor."""
    out = []
    cur = SkipCursor()
    clen = index.entry(term).clen
    for x in candidate:
        found, cur = skip_member(index, term, cur, x, counter=counter)
        if found:
            out.append(x)
        elif cur.pos >= clen:
            break
    return out


def repair_intersect(candidate: Sequence[int], index: CompressedIndex, term: str,
                     sampling: str | None = "auto", search: str = "exp",
                     counter: TouchCounter | None = None,
                     samples: SampleArrayA | SampleArrayB | None = None) -> list[int]:
    """Intersect ``candidate`` with a Re-Pair list.

    For each unresolved candidate ``x`` the phrases are skipped (after a jump
    through the sampling, when there is one) up to the phrase covering
    ``(x1, x2]`` with ``x1 < x <= x2``; every candidate up to ``x2`` is then
    resolved by one walk down that phrase, skipping children of the forest
    whose range holds no candidate.

    ``sampling`` is ``"auto"`` (use whatever the index carries), ``None``, ``"a"``
    or ``"b"``; ``samples`` overrides the stored sample array.
    """
    e = index.entry(term)
    forest = index.forest
    shift = forest.shift
    sum_of = _sum_function(forest)
    left, right = forest._left, forest._right
    C = index.C
    start, end = e.pointer, e.pointer + e.clen

    if samples is None and sampling is not None:
        kind = index.sampling[0] if index.sampling else None
        if sampling == "auto":
            sampling = kind
        elif sampling != kind:
            raise ConfigurationError(f"index has no ({sampling})-sampling")
        if sampling:
            samples = index.samples[term]
    a_values = b_values = None
    if isinstance(samples, SampleArrayA):
        a_values, t = samples.values, samples.t
    elif isinstance(samples, SampleArrayB):
        b_values, b_offsets, k = samples.values, samples.offsets, samples.k
        nb = len(b_values)

    out: list[int] = []
    touches = 0
    m = len(candidate)

    def walk(v, base, total, lo, hi):
        nonlocal touches
        end_val = base + total
        last_hit = candidate[hi - 1] == end_val
        if last_hit:
            hi -= 1
        if lo < hi and v > shift:
            p = v - shift
            lv = left[p]
            touches += 1
            gl = sum_of(lv)
            mid = base + gl
            split = bisect_right(candidate, mid, lo, hi)
            if split > lo:
                walk(lv, base, gl, lo, split)
            if split < hi:
                touches += 1
                walk(right[p], mid, total - gl, split, hi)
        if last_hit:
            out.append(end_val)

    pos = start
    s = 0
    j = 0
    i = 0
    while i < m:
        x = candidate[i]
        if a_values is not None:
            j = _last_below(a_values, j, x, search, counter)
            target = start + j * t
            if target > pos:
                pos, s = target, a_values[j]
        elif b_values is not None:
            bi = x >> k
            if bi >= nb:
                break
            touches += 1
            target = start + b_offsets[bi] - 1
            if target > pos:
                pos, s = target, b_values[bi]
        g = 0
        v = 0
        while pos < end:
            v = C[pos]
            touches += 1
            g = v if v <= shift else sum_of(v)
            if s + g < x:
                s += g
                pos += 1
            else:
                break
        if pos >= end:
            break
        hi = s + g
        stop = bisect_right(candidate, hi, i)
        walk(v, s, g, i, stop)
        s = hi
        pos += 1
        i = stop
    if counter is not None:
        counter.touches += touches
    return out


def lookup_intersect(candidate: Sequence[int], target, term: str | None = None,
                     counter: TouchCounter | None = None) -> list[int]:
    """Domain-bucket lookup on a coded list or a (b)-sampled Re-Pair list."""
    if isinstance(target, CodedList):
        return lookup_coded(candidate, target)
    if isinstance(target, CodedIndex):
        return lookup_coded(candidate, target.get(term))
    if isinstance(target, CompressedIndex):
        if not target.sampling or target.sampling[0] != "b":
            raise ConfigurationError("lookup needs (b)-sampling")
        return repair_intersect(candidate, target, term, "b", counter=counter)
    raise ConfigurationError(f"lookup is not defined for {type(target).__name__}")


# ---------------------------------------------------------------- dispatch

def intersect_with(candidate: Sequence[int], index, term: str, strategy: str,
                   counter: TouchCounter | None = None) -> list[int]:
    """``candidate`` intersected with ``term``'s list in ``index``."""
    if isinstance(index, HybridIndex):
        bm = index.bitmaps.get(term)
        if bm is not None:
            bits = bm.bits
            return [x for x in candidate if (bits >> x) & 1]
        return intersect_with(candidate, index.base, term, strategy, counter)

    if isinstance(index, PlainIndex):
        lst = index.view(term)
        if strategy == "merge":
            return merge_intersect(candidate, lst)
        if strategy == "by":
            return by_intersect(candidate, lst)
        if strategy.startswith("svs-"):
            return svs_intersect(candidate, lst, strategy[4:])
        raise ConfigurationError(f"strategy {strategy!r} not available on plain lists")

    if isinstance(index, CodedIndex):
        cl = index.get(term)
        if strategy == "merge":
            return merge_intersect(candidate, cl.decode())
        if strategy.startswith("svs-"):
            return svs_coded(candidate, cl, strategy[4:])
        if strategy == "lookup":
            return lookup_coded(candidate, cl)
        raise ConfigurationError(f"strategy {strategy!r} not available on coded lists")

    if isinstance(index, CompressedIndex):
        if strategy == "merge":
            return merge_intersect(candidate, index.decode(term))
        if strategy == "skip":
            return repair_intersect(candidate, index, term, None, counter=counter)
        if strategy == "skip-member":
            return skip_intersect(candidate, index, term, counter)
        if strategy.startswith("svs-"):
            return repair_intersect(candidate, index, term, "a", strategy[4:], counter)
        if strategy == "lookup":
            return repair_intersect(candidate, index, term, "b", counter=counter)
        raise ConfigurationError(f"strategy {strategy!r} not available on Re-Pair lists")

    raise ConfigurationError(f"unsupported index type {type(index).__name__}")


def order_terms(index, terms: Sequence[str]) -> list[str]:
    """Distinct terms by increasing uncompressed length, ties by term."""
    uniq = list(dict.fromkeys(terms))
    for t in uniq:
        if t not in index:
            raise UnknownTermError(t)
    return sorted(uniq, key=lambda t: (index.length(t), t))


def multi_intersect(index, terms: Sequence[str], strategy: str = "merge",
                    counter: TouchCounter | None = None) -> list[int]:
    """Pairwise intersection from the shortest list to the longest; the
    shortest list is fully decoded and serves as the first candidate."""
    if not terms:
        raise ConfigurationError("at least one term is required")
    ordered = order_terms(index, terms)
    if isinstance(index, HybridIndex) and all(index.is_bitmap(t) for t in ordered):
        bits = index.bitmaps[ordered[0]].bits
        for t in ordered[1:]:
            bits &= index.bitmaps[t].bits
        return bitmap_members(bits)
    cand = index.decode(ordered[0])
    for t in ordered[1:]:
        if not cand:
            break
        cand = intersect_with(cand, index, t, strategy, counter)
    return cand
