"""Shared fixtures and oracle helpers."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from semcloud.sketch import CorpusSketch, SketchConfig, absorb_document
from semcloud.textproc import DocStats, TokenizedDoc, compute_doc_stats

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_corpus_dir() -> Path:
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def fixture_article() -> str:
    return (FIXTURES / "article.txt").read_text(encoding="utf-8")


def synthetic_doc_stats(rng: np.random.Generator, vocab: list[str], n_tokens: int) -> DocStats:
    """Random document over a vocabulary with a long-tail word distribution."""
    ranks = np.arange(1, len(vocab) + 1, dtype=np.float64)
    weights = 1.0 / ranks
    weights /= weights.sum()
    tokens = [vocab[i] for i in rng.choice(len(vocab), size=n_tokens, p=weights)]
    sentences = [tokens[i : i + 12] for i in range(0, len(tokens), 12)]
    doc = TokenizedDoc(
        sentences=sentences,
        positions=[list(range(len(s))) for s in sentences],
    )
    return compute_doc_stats(doc, sigma=4.0, max_pair_distance=16)


def synthetic_corpus(
    seed: int, n_docs: int = 80, vocab_size: int = 300, n_tokens: int = 40
) -> list[DocStats]:
    rng = np.random.default_rng(seed)
    vocab = [f"w{i:03d}" for i in range(vocab_size)]
    return [synthetic_doc_stats(rng, vocab, n_tokens) for _ in range(n_docs)]


def exact_means(corpus: list[DocStats]) -> dict[tuple, float]:
    """Exact mean per-document normalized weight for every key.

    Independent accumulator over the same normalized values the sketch
    absorbs; word keys are ('w', word), pair keys ('p', a, b).
    """
    sums: dict[tuple, float] = {}
    for stats in corpus:
        if stats.sigma_words > 0:
            inv_w = 1.0 / stats.sigma_words
            for word, count in stats.word_weights.items():
                key = ("w", word)
                sums[key] = sums.get(key, 0.0) + count * inv_w
        if stats.sigma_pairs > 0:
            inv_p = 1.0 / stats.sigma_pairs
            for (a, b), weight in stats.pair_weights.items():
                key = ("p", a, b)
                sums[key] = sums.get(key, 0.0) + weight * inv_p
    return {key: value / len(corpus) for key, value in sums.items()}


def build_sketch(corpus: list[DocStats], num_buckets: int, **config_kwargs) -> CorpusSketch:
    built = CorpusSketch.empty(SketchConfig(num_buckets=num_buckets, **config_kwargs))
    for stats in corpus:
        absorb_document(built, stats)
    return built
