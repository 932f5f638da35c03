"""Corpus-normalized significance odds for words and word pairs.

A word or pair is significant when its in-document probability exceeds its
corpus probability after Laplace-style corrections on both sides: the
document weight is reduced by a per-document bias (half a pair weight, or
one word occurrence) and the corpus weight is increased by a small constant
so unseen words cannot reach an infinite ratio. Odds convert to
probabilities with p = r / (r + 1).
"""

from __future__ import annotations

from dataclasses import dataclass

from .sketch import CorpusSketch, estimate_pair, estimate_word
from .textproc import DocStats


@dataclass(frozen=True)
class ScoreParams:
    """Scoring constants for one document.

    beta_c biases the corpus side (default 1/doc_count of the sketch);
    prior = k / number of word types rescales pair odds without changing
    their ranking. prior_in_selection keeps the prior factor inside the
    word-vs-pair selection maximum; turning it off mixes bare ratios.
    """

    beta_c: float
    prior: float
    k: int = 70
    min_p: float | None = None
    prior_in_selection: bool = True

    def __post_init__(self):
        if not self.beta_c > 0:
            raise ValueError("beta_c must be positive")
        if not self.prior > 0:
            raise ValueError("prior must be positive")
        if self.k < 2:
            raise ValueError("k must be at least 2")

    @classmethod
    def for_document(
        cls,
        stats: DocStats,
        doc_count: int | None = None,
        k: int = 70,
        beta_c: float | None = None,
        min_p: float | None = None,
        prior_in_selection: bool = True,
    ) -> "ScoreParams":
        """Derive parameters from a document and the corpus size.

        beta_c defaults to 1/doc_count when a corpus is available and to 1.0
        otherwise (any positive constant preserves the ranking when corpus
        frequencies are all zero).
        """
        if beta_c is None:
            beta_c = 1.0 / doc_count if doc_count else 1.0
        types = stats.num_word_types()
        if types == 0:
            raise ValueError("document too small: no eligible words")
        return cls(
            beta_c=beta_c,
            prior=k / types,
            k=k,
            min_p=min_p,
            prior_in_selection=prior_in_selection,
        )


@dataclass(frozen=True)
class ScoredPair:
    """Pair odds r (prior included) and probability p = r / (r + 1)."""

    a: str
    b: str
    r: float
    p: float


@dataclass(frozen=True)
class ScoredTerm:
    """A word with its own odds and the selection score s.

    s is the maximum of the word's odds and the odds of every pair the word
    participates in.
    """

    word: str
    count: int
    r_word: float
    s: float


def odds_to_probability(r: float) -> float:
    return r / (r + 1.0)


def score_pair(
    c_d: float, sigma_d: float, c_c: float, params: ScoreParams
) -> tuple[float, float]:
    """Odds and probability for a pair.

    c_d is the normalized in-document pair weight, sigma_d the document's
    total pair weight (the document bias is 0.5/sigma_d: half a pair may be
    present or missing by chance under distance weighting), c_c the corpus
    estimate.
    """
    beta_d = 0.5 / sigma_d
    r = max((c_d - beta_d) / (c_c + params.beta_c), 0.0) * params.prior
    return r, odds_to_probability(r)


def score_word(c_d: float, sigma_w: float, c_c: float, params: ScoreParams) -> float:
    """Odds for a single word; no prior factor.

    c_d is the word's in-document frequency, sigma_w the total token count
    (the document bias is one unweighted occurrence, 1/sigma_w).
    """
    beta_d = 1.0 / sigma_w
    return max((c_d - beta_d) / (c_c + params.beta_c), 0.0)


def select_terms(
    stats: DocStats,
    sketch: CorpusSketch | None,
    params: ScoreParams,
) -> tuple[list[ScoredTerm], list[ScoredPair]]:
    """Score every word type and pair, then keep the top-k terms.

    Passing sketch=None forces all corpus frequencies to zero, which reduces
    the ranking to document-frequency order. Returns the selected terms
    sorted by descending selection score (ties: higher count, then word),
    plus every scored pair whose endpoints were both selected.
    """
    if stats.num_word_types() < 2:
        raise ValueError("document too small: need at least 2 eligible word types")

    r_word: dict[str, float] = {}
    for word, count in stats.word_weights.items():
        c_c = estimate_word(sketch, word) if sketch is not None else 0.0
        r_word[word] = score_word(count / stats.sigma_words, stats.sigma_words, c_c, params)

    best_pair: dict[str, float] = {}
    scored_pairs: list[ScoredPair] = []
    for (a, b), weight in sorted(stats.pair_weights.items()):
        c_c = estimate_pair(sketch, a, b) if sketch is not None else 0.0
        r, p = score_pair(weight / stats.sigma_pairs, stats.sigma_pairs, c_c, params)
        scored_pairs.append(ScoredPair(a=a, b=b, r=r, p=p))
        selection_r = r if params.prior_in_selection else r / params.prior
        if selection_r > best_pair.get(a, 0.0):
            best_pair[a] = selection_r
        if selection_r > best_pair.get(b, 0.0):
            best_pair[b] = selection_r

    terms = [
        ScoredTerm(
            word=word,
            count=stats.word_weights[word],
            r_word=r,
            s=max(r, best_pair.get(word, 0.0)),
        )
        for word, r in r_word.items()
    ]
    terms.sort(key=lambda t: (-t.s, -t.count, t.word))
    selected = terms[: params.k]
    if params.min_p is not None:
        selected = [t for t in selected if odds_to_probability(t.s) >= params.min_p]

    chosen = {t.word for t in selected}
    pairs = [pr for pr in scored_pairs if pr.a in chosen and pr.b in chosen]
    return selected, pairs


def write_scores_tsv(fh, terms: list[ScoredTerm], pairs: list[ScoredPair]) -> None:
    """Dump selected terms as TSV: word, count rank, word odds, best pair odds, s.

    Count ranks use competition ranking over the selected terms (ties share
    a rank). Rows keep the selection order.
    """
    best_pair: dict[str, float] = {}
    for pr in pairs:
        best_pair[pr.a] = max(best_pair.get(pr.a, 0.0), pr.r)
        best_pair[pr.b] = max(best_pair.get(pr.b, 0.0), pr.r)
    by_count = sorted(terms, key=lambda t: -t.count)
    count_rank: dict[str, int] = {}
    for position, term in enumerate(by_count, start=1):
        if position > 1 and term.count == by_count[position - 2].count:
            count_rank[term.word] = count_rank[by_count[position - 2].word]
        else:
            count_rank[term.word] = position
    fh.write("word\tcount_rank\tword_odds\tpair_odds\tscore\n")
    for term in terms:
        fh.write(
            f"{term.word}\t{count_rank[term.word]}\t{term.r_word:.6g}"
            f"\t{best_pair.get(term.word, 0.0):.6g}\t{term.s:.6g}\n"
        )
