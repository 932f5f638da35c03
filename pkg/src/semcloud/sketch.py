"""Bounded-memory frequency summary of a background text corpus.

A single bucket table stores weighted word and word-pair frequencies. Each
absorbed document writes the per-bucket maximum of its normalized values
("write max"), and lookups take the minimum over the hash functions ("read
min"), so an estimate never falls below the true mean per-article weight.
Word and pair keys share the table and are disambiguated by the pair
separator byte, which cannot occur inside a token.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .textproc import DocStats

MAGIC = b"SMCS"
FORMAT_VERSION = 1
# Little-endian header: magic, version, num_buckets, num_hashes, hash_seed,
# sigma, doc_count. Bucket values follow as raw float32.
_HEADER = struct.Struct("<4sIQIQdQ")

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_BUCKET_MAX = float(np.finfo(np.float32).max)

PAIR_SEPARATOR = b"\x1f"

# Bound on the internal key -> bucket-indices cache (entries, not bytes).
_INDEX_CACHE_LIMIT = 1 << 20


class SketchFormatError(ValueError):
    """A sketch file failed to parse; `offset` names the offending byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class SketchConfig:
    """Table geometry and hashing/weighting parameters.

    num_buckets must be a power of two so indices reduce by bitmask; the
    default table size suits a full encyclopedia-scale corpus, desk-scale
    builds typically use 2**20.
    """

    num_buckets: int = 1 << 26
    num_hashes: int = 4
    hash_seed: int = 0
    sigma: float = 4.0

    def __post_init__(self):
        if self.num_buckets < 2 or self.num_buckets & (self.num_buckets - 1):
            raise ValueError("num_buckets must be a power of two >= 2")
        if not 1 <= self.num_hashes <= 16:
            raise ValueError("num_hashes must be between 1 and 16")
        if not 0 <= self.hash_seed <= _MASK64:
            raise ValueError("hash_seed must be an unsigned 64-bit integer")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def _mix64(x: int) -> int:
    """64-bit finalizer with full avalanche (splitmix64 style)."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def word_key(word: str) -> bytes:
    """Canonical key bytes for a single word."""
    return word.encode("utf-8")


def pair_key(a: str, b: str) -> bytes:
    """Canonical key bytes for a word pair: smaller word, 0x1F, larger word."""
    if a > b:
        a, b = b, a
    return a.encode("utf-8") + PAIR_SEPARATOR + b.encode("utf-8")


def hash_key(key: bytes, j: int, config: SketchConfig) -> int:
    """Bucket index of `key` under hash function `j`.

    A chunked FNV-1a over the key bytes, seeded with (hash_seed XOR j) and
    finalized for avalanche, reduced by bitmask to the table size. Total
    function: any j in [0, num_hashes) and any byte string are valid.
    """
    h = _FNV_OFFSET ^ _mix64((config.hash_seed ^ j) & _MASK64)
    for pos in range(0, len(key), 8):
        h = ((h ^ int.from_bytes(key[pos : pos + 8], "little")) * _FNV_PRIME) & _MASK64
    h = ((h ^ len(key)) * _FNV_PRIME) & _MASK64
    return _mix64(h) & (config.num_buckets - 1)


@dataclass
class CorpusSketch:
    """Bucket table plus the number of absorbed documents.

    Buckets are accumulated in float64 so that collision-free buckets follow
    the exact same addition sequence as an exact per-key accumulator and the
    upper-bound guarantee survives verbatim comparison; the on-disk format
    stores float32.
    """

    config: SketchConfig
    buckets: np.ndarray
    doc_count: int = 0
    overflow_warnings: int = 0
    _index_cache: dict[bytes, tuple[int, ...]] = field(
        default_factory=dict, repr=False, compare=False
    )

    @classmethod
    def empty(cls, config: SketchConfig) -> "CorpusSketch":
        return cls(config=config, buckets=np.zeros(config.num_buckets, dtype=np.float64))

    def key_indices(self, key: bytes) -> tuple[int, ...]:
        """All bucket indices of a key, memoized for hot keys."""
        cached = self._index_cache.get(key)
        if cached is None:
            cached = tuple(
                hash_key(key, j, self.config) for j in range(self.config.num_hashes)
            )
            if len(self._index_cache) >= _INDEX_CACHE_LIMIT:
                self._index_cache.clear()
            self._index_cache[key] = cached
        return cached


def absorb_document(sketch: CorpusSketch, stats: DocStats) -> CorpusSketch:
    """Add one document's normalized weights into the sketch (in place).

    Word counts are divided by the document's total token count and pair
    weights by its total pair weight, so bucket contents sum per-article
    probabilities. Each touched bucket receives the maximum normalized value
    among the keys hashing to it. Additions that would exceed the float32
    range saturate at the largest finite value and bump overflow_warnings,
    keeping estimates upper bounds instead of failing.
    """
    per_bucket: dict[int, float] = {}
    if stats.sigma_words > 0:
        inv_words = 1.0 / stats.sigma_words
        for word, count in stats.word_weights.items():
            value = count * inv_words
            for index in sketch.key_indices(word_key(word)):
                if value > per_bucket.get(index, 0.0):
                    per_bucket[index] = value
    if stats.sigma_pairs > 0:
        inv_pairs = 1.0 / stats.sigma_pairs
        for (a, b), weight in stats.pair_weights.items():
            value = weight * inv_pairs
            for index in sketch.key_indices(pair_key(a, b)):
                if value > per_bucket.get(index, 0.0):
                    per_bucket[index] = value
    buckets = sketch.buckets
    for index, value in per_bucket.items():
        updated = buckets[index] + value
        if not np.isfinite(updated) or updated > _BUCKET_MAX:
            updated = _BUCKET_MAX
            sketch.overflow_warnings += 1
        buckets[index] = updated
    sketch.doc_count += 1
    return sketch


def merge_sketches(base: CorpusSketch, other: CorpusSketch) -> CorpusSketch:
    """Combine two partial sketches built with the same config.

    Buckets add element-wise and document counts add, matching a serial
    build over the union of their documents up to float addition order.
    """
    if base.config != other.config:
        raise ValueError("cannot merge sketches with different configs")
    merged = np.minimum(base.buckets + other.buckets, _BUCKET_MAX)
    overflowed = int(np.count_nonzero(base.buckets + other.buckets > _BUCKET_MAX))
    return CorpusSketch(
        config=base.config,
        buckets=merged,
        doc_count=base.doc_count + other.doc_count,
        overflow_warnings=base.overflow_warnings + other.overflow_warnings + overflowed,
    )


def _estimate(sketch: CorpusSketch, key: bytes) -> float:
    if sketch.doc_count < 1:
        raise ValueError("empty sketch: absorb at least one document before estimating")
    indices = sketch.key_indices(key)
    smallest = sketch.buckets[indices[0]]
    for index in indices[1:]:
        value = sketch.buckets[index]
        if value < smallest:
            smallest = value
    return float(smallest) / sketch.doc_count


def estimate_word(sketch: CorpusSketch, word: str) -> float:
    """Mean per-article frequency of a word; never below the true value."""
    return _estimate(sketch, word_key(word))


def estimate_pair(sketch: CorpusSketch, a: str, b: str) -> float:
    """Mean per-article weighted cooccurrence of a pair; never below the true value."""
    return _estimate(sketch, pair_key(a, b))


def save(sketch: CorpusSketch, path) -> None:
    """Write the sketch in the versioned binary format (bit-exact round trip)."""
    config = sketch.config
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        config.num_buckets,
        config.num_hashes,
        config.hash_seed,
        config.sigma,
        sketch.doc_count,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(sketch.buckets.astype("<f4").tobytes())


def load(path) -> CorpusSketch:
    """Read a sketch file, validating magic, version, and payload length."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise SketchFormatError("truncated header", offset=len(header))
        magic, version, num_buckets, num_hashes, hash_seed, sigma, doc_count = _HEADER.unpack(
            header
        )
        if magic != MAGIC:
            raise SketchFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
        if version != FORMAT_VERSION:
            raise SketchFormatError(f"unsupported version {version}", offset=4)
        try:
            config = SketchConfig(
                num_buckets=num_buckets,
                num_hashes=num_hashes,
                hash_seed=hash_seed,
                sigma=sigma,
            )
        except ValueError as exc:
            raise SketchFormatError(f"invalid header field: {exc}", offset=8) from exc
        payload = fh.read(num_buckets * 4)
        if len(payload) < num_buckets * 4:
            raise SketchFormatError(
                "truncated bucket array", offset=_HEADER.size + len(payload)
            )
    buckets = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return CorpusSketch(config=config, buckets=buckets, doc_count=doc_count)
