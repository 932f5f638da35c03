"""Sentence splitting, token filtering, and distance-weighted cooccurrence stats.

The pipeline is deliberately lightweight: a regex tokenizer, a configurable
stopword list that approximates a part-of-speech filter, and an optional
plural stripper. Pair weights fall off with token distance under a Gaussian
kernel, so words in the same sentence count more the closer they stand.
"""

from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field

# Sentences end at ./!/? runs followed by whitespace or end of text.
_SENTENCE_RE = re.compile(r"[.!?]+(?=\s|$)")

# Tokens are runs of letters/digits; hyphens and apostrophes only internally.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*")

# Auxiliary verbs that are never eligible, regardless of the stopword file.
AUXILIARY_STOPWORDS = frozenset({"be", "do", "have"})

# Default stopword list: the three auxiliaries with their inflections plus a
# standard set of English function words (articles, prepositions, pronouns,
# conjunctions, modals). Demonstratives are intentionally absent; they behave
# like content words often enough to keep.
DEFAULT_STOPWORDS = frozenset(
    """
    am is are was were be been being
    do does did doing done
    have has had having
    an the
    and as because but if nor or so than then though although while yet
    about above across after against along among around at before behind
    below beneath beside between beyond by down during except for from in
    inside into near of off on onto out outside over through to toward
    under until up upon with within without
    he her hers him his i it its me mine my our ours she their theirs them
    they us we you your yours myself yourself himself herself itself
    ourselves yourselves themselves who whom whose which what
    can could may might must shall should will would
    again also here how however just once only quite rather really there
    too very when where why not no
    all any both each either every few many much neither none some such
    """.split()
)


def load_stoplist(path) -> frozenset[str]:
    """Read a stopword file: one token per line, '#' starts a comment."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            entry = line.split("#", 1)[0].strip().lower()
            if entry:
                words.add(entry)
    return frozenset(words)


@dataclass(frozen=True)
class PipelineRules:
    """Tokenizer configuration.

    distance_basis selects which token indices feed the pair-distance
    weighting: "postfilter" counts positions among the eligible tokens,
    "prefilter" counts positions in the raw sentence before filtering.
    """

    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    strip_suffixes: bool = False
    min_token_length: int = 2
    distance_basis: str = "postfilter"

    def __post_init__(self):
        if self.distance_basis not in ("postfilter", "prefilter"):
            raise ValueError("distance_basis must be 'postfilter' or 'prefilter'")
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")


@dataclass
class TokenizedDoc:
    """Sentences of eligible tokens with the positions used for distances."""

    sentences: list[list[str]] = field(default_factory=list)
    positions: list[list[int]] = field(default_factory=list)

    def word_types(self) -> set[str]:
        return {tok for sent in self.sentences for tok in sent}


def _strip_plural(token: str) -> str:
    if len(token) < 4 or token.endswith("ss"):
        return token
    for suffix in ("ches", "shes", "ses", "xes", "zes"):
        if token.endswith(suffix):
            return token[:-2]
    if token.endswith("s") and not token.endswith(("us", "is")):
        return token[:-1]
    return token


def tokenize(text: str, rules: PipelineRules = PipelineRules()) -> TokenizedDoc:
    """Split text into sentences of lowercased eligible tokens.

    Tokens shorter than the minimum length are dropped, then the stopword
    list (always including the bare auxiliaries) is applied. Empty sentences
    are omitted.
    """
    stopset = rules.stopwords | AUXILIARY_STOPWORDS
    doc = TokenizedDoc()
    for chunk in _SENTENCE_RE.split(text):
        raw = _TOKEN_RE.findall(chunk.lower())
        kept: list[str] = []
        pos: list[int] = []
        for raw_index, token in enumerate(raw):
            if rules.strip_suffixes:
                token = _strip_plural(token)
            if len(token) < rules.min_token_length or token in stopset:
                continue
            kept.append(token)
            pos.append(raw_index if rules.distance_basis == "prefilter" else len(kept) - 1)
        if kept:
            doc.sentences.append(kept)
            doc.positions.append(pos)
    return doc


def gaussian_weight(distance: int, sigma: float) -> float:
    """Cooccurrence weight for two tokens `distance` apart (the 1/sqrt(2*pi*sigma^2)
    factor cancels after normalization and is omitted)."""
    return math.exp(-(distance * distance) / (2.0 * sigma * sigma))


@dataclass
class DocStats:
    """Per-document raw word counts and weighted pair counts.

    Pair keys are ordered (a, b) with a < b; codepoint order on Python
    strings coincides with byte order of their UTF-8 encodings. Totals
    sigma_pairs and sigma_words are the sums of the stored values.
    """

    word_weights: dict[str, int]
    pair_weights: dict[tuple[str, str], float]
    sigma_pairs: float
    sigma_words: int

    def pair_weight(self, a: str, b: str) -> float:
        if a > b:
            a, b = b, a
        return self.pair_weights.get((a, b), 0.0)

    def num_word_types(self) -> int:
        return len(self.word_weights)


def compute_doc_stats(
    doc: TokenizedDoc, sigma: float = 4.0, max_pair_distance: int = 16
) -> DocStats:
    """Aggregate word counts and Gaussian-weighted within-sentence pair weights.

    Every position pair i < j with distance at most max_pair_distance
    contributes gaussian_weight(d, sigma) to the ordered pair of its tokens;
    pairs of identical tokens are skipped.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if max_pair_distance < 1:
        raise ValueError("max_pair_distance must be >= 1")
    words: Counter[str] = Counter()
    pairs: dict[tuple[str, str], float] = defaultdict(float)
    for tokens, positions in zip(doc.sentences, doc.positions):
        words.update(tokens)
        n = len(tokens)
        for i in range(n):
            for j in range(i + 1, n):
                d = positions[j] - positions[i]
                if d > max_pair_distance:
                    break  # positions are ascending within a sentence
                if tokens[i] == tokens[j]:
                    continue
                a, b = (tokens[i], tokens[j]) if tokens[i] < tokens[j] else (tokens[j], tokens[i])
                pairs[(a, b)] += gaussian_weight(d, sigma)
    return DocStats(
        word_weights=dict(words),
        pair_weights=dict(pairs),
        sigma_pairs=sum(pairs.values()),
        sigma_words=sum(words.values()),
    )
