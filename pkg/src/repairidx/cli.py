"""Command-line driver: build, query, bench, gen, stats."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import bench as B
from .baselines import CodedIndex, HybridIndex, PlainIndex
from .corpus import DEFAULT_SEPARATOR, PostingList, parse_corpus, read_documents, write_documents
from .errors import RepairIndexError
from .fileformat import deserialize, section_sizes, serialize
from .index import CompressedIndex, space_model
from .intersect import multi_intersect

log = logging.getLogger("repairidx")

METHOD_CHOICES = ("repair", "vbyte", "rice", "bitmap-hybrid", "plain")


def _load_corpus(path, sep=DEFAULT_SEPARATOR, pack=1):
    return parse_corpus(read_documents(path, sep), pack)


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _sampling(text: str):
    try:
        return B.parse_sampling(text)
    except RepairIndexError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_index(postings, u, method, sampling=None, sums=True, cut="all", mode="exact"):
    if method == "repair":
        return B.build_method(postings, u, "repair" if sums else "repair-nosums", sampling,
                              cut_policy=cut, mode=mode)
    if method == "bitmap-hybrid":
        return B.build_method(postings, u, "hybrid-vbyte", sampling)
    return B.build_method(postings, u, method, sampling)


# ---------------------------------------------------------------- commands

def cmd_build(args) -> int:
    u, postings = _load_corpus(args.input, args.sep, args.pack)
    t0 = time.perf_counter()
    ix = build_index(postings, u, args.method, args.sampling, args.sums == "on", args.cut, args.mode)
    size = serialize(ix, args.out)
    log.info("built %s index of %d terms in %.2fs", args.method, len(postings),
             time.perf_counter() - t0)
    print(f"{args.out}: {len(postings)} terms, u={u}, {size} bytes")
    return 0


def cmd_query(args) -> int:
    ix = deserialize(args.index)
    strategy = args.strategy or B.default_strategy(
        "repair" if isinstance(ix, CompressedIndex) else getattr(ix, "method", "plain"),
        ix.sampling)
    result = multi_intersect(ix, args.terms, strategy)
    print(f"{len(result)} documents")
    if result:
        print(" ".join(map(str, result)))
    return 0


def _bench_methods(postings, u, specs):
    """``METHOD[/STRATEGY][/SAMPLING]`` or a path to a saved index."""
    out = []
    for spec in specs:
        if Path(spec).is_file():
            ix = deserialize(spec)
            tag = "repair" if isinstance(ix, CompressedIndex) else ix.method
            out.append(B.BenchMethod(Path(spec).stem, B.default_strategy(tag, ix.sampling),
                                     B.sampling_label(ix.sampling), ix))
            continue
        parts = spec.split("/")
        method = parts[0]
        sampling = B.parse_sampling(parts[2]) if len(parts) > 2 else None
        strategy = parts[1] if len(parts) > 1 and parts[1] else B.default_strategy(method, sampling)
        ix = B.build_method(postings, u, method, sampling)
        out.append(B.BenchMethod(method, strategy, B.sampling_label(sampling), ix))
    return out


def _postings_from_index(ix):
    return {t: PostingList(t, tuple(ix.decode(t))) for t in ix.terms}


def _bench_shard(args):
    methods, pairs, band, requested, reps = args
    qs = B.QuerySet(pairs, band, requested)
    return B.run_bench(methods, qs, reps, oracle=methods[0].index)


def cmd_bench(args) -> int:
    if args.input:
        u, postings = _load_corpus(args.input, args.sep, args.pack)
    elif args.indexes and all(Path(s).is_file() for s in args.indexes):
        first = deserialize(args.indexes[0])
        u, postings = first.u, _postings_from_index(first)
    else:
        postings = B.gen_zipf_corpus(args.V, args.u, args.exponent, args.seed)
        if args.cluster:
            postings = B.gen_clustered(postings, args.cluster, args.seed, args.u)
        u = args.u
    t0 = time.perf_counter()
    if args.indexes:
        methods = _bench_methods(postings, u, args.indexes)
    else:
        methods = B.default_matrix(postings, u)
    # the oracle reads uncompressed lists
    oracle = PlainIndex(u, {t: list(pl.docs) for t, pl in postings.items()})
    log.info("built %d method configurations in %.1fs", len(methods), time.perf_counter() - t0)
    queries = B.pick_query_pairs(postings, args.ratios or B.DEFAULT_RATIOS, args.band,
                                 args.pairs, args.seed)
    print(f"# {len(queries.pairs)} query pairs; {queries.report()}", file=sys.stderr)
    if args.workers > 1:
        shards = [queries.pairs[i::args.workers] for i in range(args.workers)]
        oracle_methods = [B.BenchMethod("oracle", "merge", "none", oracle)] + methods
        with ProcessPoolExecutor(args.workers) as pool:
            jobs = [(oracle_methods, s, queries.band, queries.requested, args.reps)
                    for s in shards if s]
            records = [r for rows in pool.map(_bench_shard, jobs) for r in rows
                       if r.method != "oracle/merge"]
    else:
        records = B.run_bench(methods, queries, args.reps, oracle=oracle)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            B.records_to_csv(records, fh)
        print(f"{len(records)} rows written to {args.csv}", file=sys.stderr)
    else:
        sys.stdout.write(B.records_to_csv(records))
    return 0


def cmd_gen(args) -> int:
    if args.kind == "zipf":
        postings = B.gen_zipf_corpus(args.V, args.u, args.exponent, args.seed)
        u = args.u
    else:
        if not args.input:
            raise SystemExit(f"gen {args.kind} needs --input")
        u, postings = _load_corpus(args.input, args.sep)
        if args.kind == "clustered":
            postings = B.gen_clustered(postings, args.factor, args.seed, u)
        else:
            postings = B.shuffle_lists(postings, args.seed, u)
    write_documents(args.out, u, postings, args.sep)
    total = sum(len(p) for p in postings.values())
    print(f"{args.out}: {len(postings)} terms, {u} documents, {total} postings")
    return 0


def index_stats(ix) -> dict:
    stats: dict = {"method": "repair" if isinstance(ix, CompressedIndex) else ix.method,
                   "u": ix.u, "terms": len(ix.terms), "file_bytes": section_sizes(ix),
                   "bits": ix.size_breakdown()}
    stats["sampling"] = B.sampling_label(ix.sampling)
    if isinstance(ix, CompressedIndex):
        stats["symbols_in_C"] = len(ix.C)
        stats["R_B_bits"] = ix.forest.bits
        stats["width"] = ix.width
        stats["max_rule_height"] = ix.forest.max_height()
        stats["space_model"] = space_model(ix)
    elif isinstance(ix, HybridIndex):
        stats["tau"] = ix.tau
        stats["bitmap_lists"] = len(ix.bitmaps)
    elif isinstance(ix, CodedIndex):
        stats["codec"] = ix.codec
    return stats


def cmd_stats(args) -> int:
    if args.index:
        print(json.dumps(index_stats(deserialize(args.index)), indent=2))
    if args.heights:
        if not args.heights_input:
            postings = B.gen_zipf_corpus(args.V, args.u, args.exponent, args.seed)
        else:
            _, postings = _load_corpus(args.heights_input, args.sep)
        print(B.format_heights(B.report_heights(postings, args.packings)))
    if not args.index and not args.heights:
        raise SystemExit("stats needs --index FILE and/or --heights")
    return 0


# ---------------------------------------------------------------- parser

def _corpus_args(p, defaults=(50000, 20000)):
    p.add_argument("--V", type=int, default=defaults[0], help="synthetic vocabulary size")
    p.add_argument("--u", type=int, default=defaults[1], help="synthetic document count")
    p.add_argument("--exponent", type=float, default=1.0, help="Zipf exponent")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="repairidx",
                                 description="Re-Pair compressed inverted indexes")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="index a corpus")
    p.add_argument("--input", required=True, help="directory of text files or one file")
    p.add_argument("--sep", default=DEFAULT_SEPARATOR, help="document separator line")
    p.add_argument("--pack", type=int, default=1, help="merge N consecutive documents")
    p.add_argument("--method", choices=METHOD_CHOICES, default="repair")
    p.add_argument("--sampling", type=_sampling, default=None, help="none, a:T or b:B")
    p.add_argument("--sums", choices=("on", "off"), default="on")
    p.add_argument("--cut", choices=("all", "optimal"), default="all")
    p.add_argument("--mode", choices=("exact", "approximate"), default="exact")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="intersect the lists of some terms")
    p.add_argument("--index", required=True)
    p.add_argument("--terms", nargs="+", required=True)
    p.add_argument("--strategy", default=None)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="time intersections by ratio bucket")
    p.add_argument("--indexes", nargs="*", default=None,
                   help="index files or METHOD[/STRATEGY][/SAMPLING] specs")
    p.add_argument("--input", default=None, help="corpus to benchmark (default: synthetic Zipf)")
    p.add_argument("--sep", default=DEFAULT_SEPARATOR)
    p.add_argument("--pack", type=int, default=1)
    _corpus_args(p)
    p.add_argument("--cluster", type=int, default=0, help="cluster factor for the synthetic corpus")
    p.add_argument("--band", type=_range, default=None, help="longer-list length range LO:HI")
    p.add_argument("--ratios", type=_int_list, default=None, help="ratio bucket edges")
    p.add_argument("--pairs", type=int, default=20, help="pairs per ratio bucket")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--workers", type=int, default=1, help="shard query pairs over processes")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a synthetic corpus")
    p.add_argument("kind", choices=("zipf", "clustered", "shuffle"))
    p.add_argument("--input", default=None, help="source corpus for clustered/shuffle")
    p.add_argument("--sep", default=DEFAULT_SEPARATOR)
    _corpus_args(p, (2000, 2000))
    p.add_argument("--factor", type=int, default=8, help="cluster factor")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="space breakdown and rule heights")
    p.add_argument("--index", default=None)
    p.add_argument("--heights", action="store_true", help="rule heights per packing factor")
    p.add_argument("--heights-input", default=None, help="corpus for --heights (default: Zipf)")
    p.add_argument("--sep", default=DEFAULT_SEPARATOR)
    _corpus_args(p, (2000, 4096))
    p.add_argument("--packings", type=_int_list, default=[1, 2, 4, 8, 16, 32, 64, 128])
    p.set_defaults(func=cmd_stats)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except RepairIndexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: unknown term {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
