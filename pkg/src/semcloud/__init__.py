"""Semantic word clouds from single documents, normalized against a corpus sketch."""

from .cluster import OUTLIER, ClusterAssignment, Dendrogram, cut_nonsingleton, upgma
from .gravity import CompressionResult, CompressOpts, WordBox, compress, max_scale
from .render import CloudScene, SceneOpts, assemble, font_size, to_svg
from .scoring import (
    ScoredPair,
    ScoredTerm,
    ScoreParams,
    odds_to_probability,
    score_pair,
    score_word,
    select_terms,
)
from .sketch import (
    CorpusSketch,
    SketchConfig,
    SketchFormatError,
    absorb_document,
    estimate_pair,
    estimate_word,
    hash_key,
    load,
    merge_sketches,
    save,
)
from .textproc import (
    DocStats,
    PipelineRules,
    TokenizedDoc,
    compute_doc_stats,
    gaussian_weight,
    tokenize,
)
from .tsne import (
    GOLDEN_RATIO,
    AffinityMatrix,
    Layout,
    TsneOpts,
    build_affinities,
    gradient,
    kl_divergence,
    optimize,
    q_and_z,
)

__version__ = "0.1.0"
