"""Re-Pair grammar compression of integer sequences and its forest dictionary.

Symbols in the compressed output of :func:`repair_compress` are
``<= alphabet_bound`` for terminals and ``alphabet_bound + 1 + i`` for rule
``i`` (creation order).  Values ``<= 0`` in the input are list separators:
they are copied through and never take part in a pair.

:func:`build_forest` turns the rules into the preorder bitmap ``rb`` plus the
value sequence ``rs``.  In the forest encoding a symbol ``v <= shift`` is a
terminal gap and ``v > shift`` is the subtree rooted at ``rb`` position
``v - shift``.
"""
from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bitvec import RankBitmap
from .errors import ConfigurationError, InvalidSymbolError

APPROX_CAPACITY = 10_000


@dataclass
class Rule:
    left: int
    right: int
    freq: int = 0
    # 1 when the child is a terminal or a rule already used by an earlier rule
    c_left: int = 1
    c_right: int = 1


@dataclass
class RuleList:
    rules: list[Rule] = field(default_factory=list)
    alphabet_bound: int = 0

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, i):
        return self.rules[i]

    def symbol(self, i: int) -> int:
        return self.alphabet_bound + 1 + i

    def index(self, sym: int) -> int | None:
        """Rule index for ``sym``, or None for terminals and separators."""
        if sym > self.alphabet_bound:
            return sym - self.alphabet_bound - 1
        return None

    def pairs(self) -> list[tuple[int, int]]:
        return [(r.left, r.right) for r in self.rules]

    def sums(self) -> list[int]:
        out: list[int] = []
        sigma = self.alphabet_bound
        for r in self.rules:
            a = r.left if r.left <= sigma else out[r.left - sigma - 1]
            b = r.right if r.right <= sigma else out[r.right - sigma - 1]
            out.append(a + b)
        return out

    def expand(self, sym: int) -> list[int]:
        out: list[int] = []
        stack = [sym]
        sigma = self.alphabet_bound
        while stack:
            x = stack.pop()
            if x <= sigma:
                out.append(x)
            else:
                r = self.rules[x - sigma - 1]
                stack.append(r.right)
                stack.append(r.left)
        return out

    def heights(self) -> list[int]:
        """Derivation-tree height per rule, counting the terminal level."""
        sigma = self.alphabet_bound
        h: list[int] = []
        for r in self.rules:
            a = 1 if r.left <= sigma else h[r.left - sigma - 1]
            b = 1 if r.right <= sigma else h[r.right - sigma - 1]
            h.append(1 + max(a, b))
        return h

    def max_height(self) -> int:
        return max(self.heights(), default=0)


def _assign_reference_flags(rules: list[Rule], sigma: int) -> None:
    used: set[int] = set()
    for r in rules:
        r.c_left = 1 if r.left <= sigma or r.left in used else 0
        used.add(r.left)
        r.c_right = 1 if r.right <= sigma or r.right in used else 0
        used.add(r.right)


def repair_compress(seq: Sequence[int], mode: str = "exact",
                    budget: int = APPROX_CAPACITY) -> tuple[list[int], RuleList]:
    """Compress ``seq`` with Re-Pair.

    ``mode`` is ``"exact"`` (one most-frequent pair per step, until no pair
    repeats) or ``"approximate"`` (bounded pair tables, many pairs per pass).
    Among equally frequent pairs the one with the smaller phrase sum wins,
    then the one occurring first.
    """
    seq = list(seq)
    sigma = max((v for v in seq if v > 0), default=0)
    if mode == "exact":
        C, rules = _repair_exact(seq, sigma)
    elif mode in ("approximate", "approx"):
        C, rules = _repair_approx(seq, sigma, budget)
    else:
        raise ConfigurationError(f"unknown Re-Pair mode {mode!r}")
    _assign_reference_flags(rules, sigma)
    return C, RuleList(rules, sigma)


def _nonoverlap_count(positions: Iterable[int], nxt: list[int]) -> int:
    count = 0
    last = -1
    for p in sorted(positions):
        if last >= 0 and nxt[last] == p:
            continue
        count += 1
        last = p
    return count


def _repair_exact(seq: list[int], sigma: int) -> tuple[list[int], list[Rule]]:
    n = len(seq)
    s: list = list(seq)
    nxt = list(range(1, n + 1))
    if n:
        nxt[-1] = -1
    prv = list(range(-1, n - 1))
    occ: dict[tuple[int, int], set[int]] = defaultdict(set)
    for i in range(n - 1):
        a, b = s[i], s[i + 1]
        if a > 0 and b > 0:
            occ[(a, b)].add(i)

    sums: dict[int, int] = {}

    def psum(pair):
        a, b = pair
        return (a if a <= sigma else sums[a]) + (b if b <= sigma else sums[b])

    version: dict[tuple[int, int], int] = defaultdict(int)
    # (-count bound, pair sum, first position bound, verified, pair, version);
    # unverified entries carry upper bounds and are refined when popped
    heap = [(-len(ps), psum(p), -1, 0, p, 0) for p, ps in occ.items() if len(ps) >= 2]
    heapq.heapify(heap)
    rules: list[Rule] = []

    while heap:
        _, ps, _, verified, pair, ver = heapq.heappop(heap)
        if ver != version[pair]:
            continue
        positions = occ.get(pair)
        if not positions:
            continue
        if not verified:
            if pair[0] == pair[1]:
                cnt = _nonoverlap_count(positions, nxt)
            else:
                cnt = len(positions)
            if cnt >= 2:
                heapq.heappush(heap, (-cnt, ps, min(positions), 1, pair, ver))
            continue

        X = sigma + 1 + len(rules)
        sums[X] = ps
        a, b = pair
        changed: set[tuple[int, int]] = set()
        freq = 0
        for i in sorted(positions):
            if s[i] != a:
                continue
            j = nxt[i]
            if j < 0 or s[j] != b:
                continue
            h = prv[i]
            k = nxt[j]
            if h >= 0 and s[h] > 0:
                left = (s[h], a)
                occ[left].discard(h)
                changed.add(left)
            if k >= 0 and s[k] > 0:
                right = (b, s[k])
                occ[right].discard(j)
                changed.add(right)
            positions.discard(i)
            s[i] = X
            s[j] = None
            nxt[i] = k
            if k >= 0:
                prv[k] = i
            if h >= 0 and s[h] > 0:
                left = (s[h], X)
                occ[left].add(h)
                changed.add(left)
            if k >= 0 and s[k] > 0:
                right = (X, s[k])
                occ[right].add(i)
                changed.add(right)
            freq += 1
        rules.append(Rule(a, b, freq))
        version[pair] += 1
        if not occ[pair]:
            del occ[pair]
        changed.discard(pair)
        for p in changed:
            version[p] += 1
            st = occ.get(p)
            if st is None:
                continue
            if not st:
                del occ[p]
            elif len(st) >= 2:
                heapq.heappush(heap, (-len(st), psum(p), -1, 0, p, version[p]))

    out = [v for v in s if v is not None]
    return out, rules


def _repair_approx(seq: list[int], sigma: int, capacity: int) -> tuple[list[int], list[Rule]]:
    cur = list(seq)
    rules: list[Rule] = []
    sums: list[int] = []
    provisional = 1 << 62

    def vsum(x):
        return x if x <= sigma else sums[x - sigma - 1]

    while True:
        counts: dict[tuple[int, int], int] = {}
        first: dict[tuple[int, int], int] = {}
        last_run_pair = -2
        for i in range(len(cur) - 1):
            a, b = cur[i], cur[i + 1]
            if a <= 0 or b <= 0:
                continue
            if a == b:
                if last_run_pair == i - 1:
                    # overlapping occurrence inside a run; leftmost wins
                    last_run_pair = -2
                    continue
                last_run_pair = i
            p = (a, b)
            c = counts.get(p)
            if c is not None:
                counts[p] = c + 1
            elif len(counts) < capacity:
                counts[p] = 1
                first[p] = i
        if not counts:
            break
        top = max(counts.values())
        if top < 2:
            break
        threshold = max(2, (top + 1) // 2)
        chosen = [p for p, c in counts.items() if c >= threshold]
        chosen.sort(key=lambda p: (-counts[p], vsum(p[0]) + vsum(p[1]), first[p]))
        rank = {p: r for r, p in enumerate(chosen)}

        out: list[int] = []
        used = [0] * len(chosen)
        i = 0
        m = len(cur)
        while i < m:
            if i + 1 < m:
                r = rank.get((cur[i], cur[i + 1]))
                if r is not None:
                    out.append(provisional + r)
                    used[r] += 1
                    i += 2
                    continue
            out.append(cur[i])
            i += 1

        remap = {}
        for r, p in enumerate(chosen):
            if used[r]:
                sym = sigma + 1 + len(rules)
                remap[provisional + r] = sym
                rules.append(Rule(p[0], p[1], used[r]))
                sums.append(vsum(p[0]) + vsum(p[1]))
        capacity += len(cur) - len(out)
        cur = [remap.get(v, v) if v >= provisional else v for v in out]
    return cur, rules


class GrammarForest:
    """Dictionary forest: preorder shape bitmap ``rb`` and values ``rs``.

    With sums, ``rs`` is aligned with ``rb`` and holds the phrase sum at each
    1 and the leaf value at each 0.  Without sums, ``rs`` holds leaves only and
    the leaf at position ``i`` is ``rs[rank0(i)]``.
    """

    def __init__(self, rb: RankBitmap, rs: Sequence[int], with_sums: bool, shift: int):
        self.rb = rb
        self.rs = list(rs)
        self.with_sums = bool(with_sums)
        self.shift = shift
        self.rho = 1 if with_sums else 0
        expected = len(rb) if with_sums else rb.zeros
        if len(self.rs) != expected:
            raise ConfigurationError(
                f"R_S has {len(self.rs)} entries, expected {expected}")
        self._build_child_table()

    def _build_child_table(self) -> None:
        # left/right child symbol per 1-position, derived from rb/rs
        size = len(self.rb) + 1
        self._left = [0] * size
        self._right = [0] * size
        stack: list[list[int]] = []
        shift = self.shift
        bit = self.rb.bit0
        for q in range(1, size):
            sym = shift + q if bit(q - 1) else self.leaf_value(q)
            if stack:
                top = stack[-1]
                if top[1] == 0:
                    self._left[top[0]] = sym
                    top[1] = 1
                else:
                    self._right[top[0]] = sym
                    top[1] = 2
            elif not bit(q - 1):
                raise ConfigurationError(f"R_B position {q} is a leaf outside any tree")
            if bit(q - 1):
                stack.append([q, 0])
            else:
                while stack and stack[-1][1] == 2:
                    stack.pop()
        if stack:
            raise ConfigurationError("R_B does not describe complete binary trees")
        for q in range(1, size):
            if not bit(q - 1):
                v = self.leaf_value(q)
                if v < 1 or (v > shift and (v - shift >= size or not bit(v - shift - 1))):
                    raise ConfigurationError(f"leaf value {v} at R_B position {q} is not a symbol")
        if self.with_sums:
            rs = self.rs
            for q in range(1, size):
                if bit(q - 1):
                    total = 0
                    for c in (self._left[q], self._right[q]):
                        total += c if c <= shift else rs[c - shift - 1]
                    if rs[q - 1] != total:
                        raise ConfigurationError(f"phrase sum at R_B position {q} is inconsistent")

    def __eq__(self, other) -> bool:
        return (isinstance(other, GrammarForest) and self.rb == other.rb
                and self.rs == other.rs and self.with_sums == other.with_sums
                and self.shift == other.shift)

    @property
    def bits(self) -> int:
        return len(self.rb)

    def leaf_value(self, q: int) -> int:
        if self.with_sums:
            return self.rs[q - 1]
        return self.rs[self.rb.rank0(q) - 1]

    def node(self, sym: int) -> int:
        p = sym - self.shift
        if not 1 <= p <= len(self.rb) or not self.rb.bit0(p - 1):
            raise InvalidSymbolError(f"symbol {sym} is not a forest node")
        return p

    def children(self, sym: int) -> tuple[int, int]:
        p = sym - self.shift
        return self._left[p], self._right[p]

    def phrase_sum(self, sym: int) -> int:
        if sym <= self.shift:
            return sym
        p = self.node(sym)
        if self.with_sums:
            return self.rs[p - 1]
        return sum(self.expand(sym))

    def expand(self, sym: int) -> list[int]:
        """Terminal gaps of ``sym``: scan ``rb`` until zeros outnumber ones."""
        shift = self.shift
        if sym <= shift:
            return [sym]
        self.node(sym)
        bit = self.rb.bit0
        out: list[int] = []
        stack = [sym]
        while stack:
            x = stack.pop()
            if x <= shift:
                out.append(x)
                continue
            q = x - shift
            ones = zeros = 0
            leaves = []
            while zeros <= ones:
                if bit(q - 1):
                    ones += 1
                else:
                    zeros += 1
                    leaves.append(self.leaf_value(q))
                q += 1
            stack.extend(reversed(leaves))
        return out

    def height(self, sym: int) -> int:
        if sym <= self.shift:
            return 1
        left, right = self.children(sym)
        return 1 + max(self.height(left), self.height(right))

    def max_height(self) -> int:
        """Largest derivation height over all nodes; 0 for an empty forest."""
        shift = self.shift
        memo: dict[int, int] = {}
        best = 0
        for p in range(1, len(self.rb) + 1):
            if not self.rb.bit0(p - 1) or p in memo:
                continue
            stack = [p]
            while stack:
                q = stack[-1]
                kids = [c - shift for c in (self._left[q], self._right[q])
                        if c > shift and c - shift not in memo]
                if kids:
                    stack.extend(kids)
                    continue
                stack.pop()
                memo[q] = 1 + max(memo.get(c - shift, 1) if c > shift else 1
                                  for c in (self._left[q], self._right[q]))
            best = max(best, memo[p])
        return best


def build_forest(rules: RuleList, with_sums: bool, shift: int) -> tuple[GrammarForest, list[int]]:
    """Lay out ``rules`` as a forest; returns it and rule index -> root position.

    A rule used by a later rule is inlined as a subtree at its first use (in
    creation order); other uses stay leaf references.  Trees are emitted in
    order of the earliest rule they contain.
    """
    if shift < rules.alphabet_bound:
        raise ConfigurationError(
            f"shift {shift} below alphabet bound {rules.alphabet_bound}")
    R = len(rules)
    parent = [-1] * R
    side = [-1] * R
    for s_idx, r in enumerate(rules):
        for k, child in ((0, r.left), (1, r.right)):
            ci = rules.index(child)
            if ci is not None and parent[ci] < 0:
                parent[ci] = s_idx
                side[ci] = k

    sums = rules.sums()
    position = [0] * R
    bits: list[int] = []
    entries: list[tuple[bool, int]] = []  # (is_node, rule index or leaf symbol)
    emitted = [False] * R
    for i in range(R):
        root = i
        while parent[root] >= 0:
            root = parent[root]
        if emitted[root]:
            continue
        emitted[root] = True
        stack: list[tuple[bool, int]] = [(True, root)]
        while stack:
            is_node, x = stack.pop()
            if is_node:
                position[x] = len(bits) + 1
                bits.append(1)
                entries.append((True, x))
                r = rules[x]
                kids = []
                for k, child in ((0, r.left), (1, r.right)):
                    ci = rules.index(child)
                    if ci is not None and parent[ci] == x and side[ci] == k:
                        kids.append((True, ci))
                    else:
                        kids.append((False, child))
                stack.append(kids[1])
                stack.append(kids[0])
            else:
                bits.append(0)
                entries.append((False, x))

    sigma = rules.alphabet_bound
    rs: list[int] = []
    for is_node, x in entries:
        if is_node:
            if with_sums:
                rs.append(sums[x])
        elif x <= sigma:
            rs.append(x)
        else:
            rs.append(shift + position[x - sigma - 1])
    return GrammarForest(RankBitmap(bits), rs, with_sums, shift), position


def encode_sequence(C: Sequence[int], rules: RuleList, position: Sequence[int],
                    shift: int) -> list[int]:
    """Re-encode rule symbols of ``C`` as ``shift + root position``."""
    sigma = rules.alphabet_bound
    return [v if v <= sigma else shift + position[v - sigma - 1] for v in C]


def symbol_bits(sigma: int, l: int) -> int:
    """Bits per C/R_S symbol in the space model: ceil(log2(sigma + l - 2))."""
    x = sigma if l == 0 else sigma + l - 2
    return 0 if x <= 1 else (x - 1).bit_length()


def model_bits(sigma: int, n: int, l: int, d: int) -> int:
    return (d + n) * symbol_bits(sigma, l) + l


def optimize_cut(rules: RuleList, C: Sequence[int], rho: int) -> tuple[int, int]:
    """Best prefix of the rule order under the space model, in O(|rules|).

    Starts from the full grammar and unrolls the last rule repeatedly,
    updating |C|, the number of rules and the number of inlined rules.
    Ties keep the larger cut.
    """
    R = len(rules)
    sigma = rules.alphabet_bound
    occ = [0] * R
    n = 0
    for v in C:
        if v > 0:
            n += 1
            if v > sigma:
                occ[v - sigma - 1] += 1
    users = [0] * R
    for r in rules:
        for child in (r.left, r.right):
            if child > sigma:
                users[child - sigma - 1] += 1
    referenced = sum(1 for u in users if u)

    def cost(nr: int, refd: int, n: int) -> int:
        l = 3 * nr - refd
        d = 2 * nr - refd + rho * nr
        return model_bits(sigma, n, l, d)

    best = cost(R, referenced, n)
    best_cut = R
    for cut in range(R - 1, -1, -1):
        r = rules[cut]
        k = occ[cut]
        n += k
        for child in (r.left, r.right):
            if child > sigma:
                ci = child - sigma - 1
                occ[ci] += k
                users[ci] -= 1
                if users[ci] == 0:
                    referenced -= 1
        c = cost(cut, referenced, n)
        if c < best:
            best, best_cut = c, cut
    return best_cut, best


def unroll_to(C: Sequence[int], rules: RuleList, cut: int) -> tuple[list[int], RuleList]:
    """Keep the first ``cut`` rules; rewrite later ones over surviving symbols."""
    R = len(rules)
    if not 0 <= cut <= R:
        raise ConfigurationError(f"cut {cut} outside [0, {R}]")
    if cut == R:
        return list(C), rules
    sigma = rules.alphabet_bound
    limit = sigma + cut  # symbols above this are discarded rules
    rewrite: list[list[int]] = []
    for r in rules.rules[cut:]:
        body: list[int] = []
        for child in (r.left, r.right):
            if child > limit:
                body.extend(rewrite[child - limit - 1])
            else:
                body.append(child)
        rewrite.append(body)
    out: list[int] = []
    for v in C:
        if v > limit:
            out.extend(rewrite[v - limit - 1])
        else:
            out.append(v)
    kept = [Rule(r.left, r.right, r.freq, r.c_left, r.c_right) for r in rules.rules[:cut]]
    return out, RuleList(kept, sigma)
