"""Inverted indexes whose posting lists are compressed with Re-Pair, with
intersection algorithms that skip over grammar phrases."""

from .baselines import (build_coded, build_plain, build_sampled, hybrid_build, rice_decode,
                        rice_encode, to_bitmap, vbyte_decode, vbyte_encode)
from .bitvec import RankBitmap, build_rank
from .corpus import PostingList, from_gaps, parse_corpus, to_gaps
from .errors import (ConfigurationError, DecodeError, FormatError, InvalidSymbolError,
                     InvariantViolation, OracleMismatch, RepairIndexError, UnknownTermError)
from .fileformat import deserialize, serialize
from .grammar import (GrammarForest, Rule, RuleList, build_forest, optimize_cut,
                      repair_compress, unroll_to)
from .index import CompressedIndex, compress_index, sample_a, sample_b
from .intersect import (SkipCursor, TouchCounter, by_intersect, exp_search, lookup_intersect,
                        merge_intersect, multi_intersect, repair_intersect, skip_member)

__version__ = "0.1.0"
