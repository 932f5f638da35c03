"""Command-line frontend: build a corpus sketch, render a word cloud.

Exit codes: 0 success, 2 usage error, 3 input error. SEMCLOUD_THREADS caps
the number of worker processes used when building a sketch.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cluster as clustering
from . import gravity as compression
from . import render, scoring, sketch, textproc, tsne

USAGE_ERROR = 2
INPUT_ERROR = 3

DESK_DEFAULT_BUCKETS = 1 << 20


@dataclass
class RunConfig:
    """All tunables for one render run."""

    sketch_path: Path | None
    doc_path: Path
    out_path: Path
    k: int = 70
    seed: int = 0
    sigma: float = 4.0
    max_pair_distance: int = 16
    beta_c: float | None = None
    no_corpus: bool = False
    num_clusters: int = 8
    stoplist_path: Path | None = None
    strip_suffixes: bool = False
    distance_basis: str = "postfilter"
    prior_in_selection: bool = True
    min_p: float | None = None
    edge_threshold: float = 0.5
    canvas: tuple[int, int] = (1280, 800)
    tsne_opts: tsne.TsneOpts = field(default_factory=tsne.TsneOpts)
    compress_opts: compression.CompressOpts = field(default_factory=compression.CompressOpts)
    scores_tsv: Path | None = None
    kl_trace: Path | None = None
    scene_json: Path | None = None


@dataclass
class CloudResult:
    scene: render.CloudScene
    svg: str
    terms: list[scoring.ScoredTerm]
    pairs: list[scoring.ScoredPair]
    layout: tsne.Layout
    compressed: compression.CompressionResult
    clusters: clustering.ClusterAssignment


def _pipeline_rules(cfg: RunConfig) -> textproc.PipelineRules:
    stopwords = (
        textproc.load_stoplist(cfg.stoplist_path)
        if cfg.stoplist_path is not None
        else textproc.DEFAULT_STOPWORDS
    )
    return textproc.PipelineRules(
        stopwords=stopwords,
        strip_suffixes=cfg.strip_suffixes,
        distance_basis=cfg.distance_basis,
    )


def build_scene(text: str, corpus: sketch.CorpusSketch | None, cfg: RunConfig) -> CloudResult:
    """Run the full render pipeline on already-loaded inputs."""
    doc = textproc.tokenize(text, _pipeline_rules(cfg))
    stats = textproc.compute_doc_stats(
        doc, sigma=cfg.sigma, max_pair_distance=cfg.max_pair_distance
    )
    params = scoring.ScoreParams.for_document(
        stats,
        doc_count=corpus.doc_count if corpus is not None else None,
        k=cfg.k,
        beta_c=cfg.beta_c,
        min_p=cfg.min_p,
        prior_in_selection=cfg.prior_in_selection,
    )
    terms, pairs = scoring.select_terms(stats, corpus, params)
    if len(terms) < 2:
        raise ValueError("document too small: fewer than 2 selected terms")

    affinities = tsne.build_affinities([t.word for t in terms], pairs)
    layout = tsne.optimize(affinities, cfg.tsne_opts)
    boxes = render.make_word_boxes(terms, layout.y)
    compressed = compression.compress(boxes, cfg.compress_opts)
    dendrogram = clustering.upgma(affinities.p)
    clusters = clustering.cut_nonsingleton(dendrogram, cfg.num_clusters)
    scene = render.assemble(
        compressed,
        terms,
        pairs,
        clusters,
        render.SceneOpts(
            canvas_width=cfg.canvas[0],
            canvas_height=cfg.canvas[1],
            edge_threshold=cfg.edge_threshold,
        ),
    )
    return CloudResult(
        scene=scene,
        svg=render.to_svg(scene),
        terms=terms,
        pairs=pairs,
        layout=layout,
        compressed=compressed,
        clusters=clusters,
    )


def iter_documents(corpus_dir: Path, records: bool):
    """Yield (name, text) per document, sorted by path for determinism.

    With records=True, blank-line-separated blocks within each file count as
    separate documents.
    """
    paths = sorted(p for p in corpus_dir.rglob("*") if p.is_file())
    for path in paths:
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
            continue
        if records:
            for i, block in enumerate(text.split("\n\n")):
                if block.strip():
                    yield f"{path}#{i}", block
        else:
            yield str(path), text


def _absorb_texts(texts, config: sketch.SketchConfig, rules, max_pair_distance):
    partial = sketch.CorpusSketch.empty(config)
    for text in texts:
        doc = textproc.tokenize(text, rules)
        stats = textproc.compute_doc_stats(
            doc, sigma=config.sigma, max_pair_distance=max_pair_distance
        )
        sketch.absorb_document(partial, stats)
    return partial


def _worker_build(args):
    texts, config, rules, max_pair_distance = args
    partial = _absorb_texts(texts, config, rules, max_pair_distance)
    return partial.buckets, partial.doc_count, partial.overflow_warnings


def build_sketch_from_dir(
    corpus_dir: Path,
    config: sketch.SketchConfig,
    rules: textproc.PipelineRules,
    max_pair_distance: int = 16,
    records: bool = False,
    threads: int = 1,
) -> sketch.CorpusSketch:
    texts = [text for _, text in iter_documents(corpus_dir, records)]
    if not texts:
        raise ValueError(f"no readable documents under {corpus_dir}")
    if threads <= 1 or len(texts) < 2 * threads:
        return _absorb_texts(texts, config, rules, max_pair_distance)

    from concurrent.futures import ProcessPoolExecutor

    chunks = [texts[i::threads] for i in range(threads)]
    chunks = [c for c in chunks if c]
    result = sketch.CorpusSketch.empty(config)
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        jobs = [(chunk, config, rules, max_pair_distance) for chunk in chunks]
        for buckets, doc_count, warnings in pool.map(_worker_build, jobs):
            result = sketch.merge_sketches(
                result,
                sketch.CorpusSketch(
                    config=config,
                    buckets=buckets,
                    doc_count=doc_count,
                    overflow_warnings=warnings,
                ),
            )
    return result


def _threads_from_env() -> int:
    raw = os.environ.get("SEMCLOUD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_build_sketch(args: argparse.Namespace) -> int:
    config = sketch.SketchConfig(
        num_buckets=args.buckets,
        num_hashes=args.hashes,
        hash_seed=args.hash_seed,
        sigma=args.sigma,
    )
    rules = textproc.PipelineRules(
        stopwords=(
            textproc.load_stoplist(args.stoplist)
            if args.stoplist
            else textproc.DEFAULT_STOPWORDS
        ),
        strip_suffixes=args.strip_suffixes,
    )
    started = time.perf_counter()
    try:
        built = build_sketch_from_dir(
            Path(args.corpus_dir),
            config,
            rules,
            max_pair_distance=args.max_pair_distance,
            records=args.records,
            threads=_threads_from_env(),
        )
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    sketch.save(built, args.out)
    elapsed = time.perf_counter() - started
    low = float(np.count_nonzero(built.buckets < 0.1)) / built.config.num_buckets
    print(f"documents: {built.doc_count}")
    print(f"buckets below 0.1: {low:.1%}")
    if built.overflow_warnings:
        print(f"overflow warnings: {built.overflow_warnings}")
    print(f"elapsed: {elapsed:.2f}s")
    return 0


def _parse_canvas(value: str) -> tuple[int, int]:
    try:
        w, h = value.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("canvas must look like 1280x800") from exc


def cmd_render(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        sketch_path=Path(args.sketch) if args.sketch else None,
        doc_path=Path(args.document),
        out_path=Path(args.out),
        k=args.k,
        seed=args.seed,
        sigma=args.sigma,
        max_pair_distance=args.max_pair_distance,
        beta_c=args.beta_c,
        no_corpus=args.no_corpus,
        num_clusters=args.clusters,
        stoplist_path=Path(args.stoplist) if args.stoplist else None,
        strip_suffixes=args.strip_suffixes,
        distance_basis=args.distance_basis,
        prior_in_selection=not args.no_prior_in_selection,
        min_p=args.min_p,
        edge_threshold=args.edge_threshold,
        canvas=args.canvas,
        tsne_opts=tsne.TsneOpts(
            iters=args.iters,
            eta=args.eta,
            exaggeration=args.exaggeration,
            seed=args.seed,
        ),
        compress_opts=compression.CompressOpts(
            step_fraction=args.step_fraction,
            max_rounds=args.max_rounds,
        ),
        scores_tsv=Path(args.scores_tsv) if args.scores_tsv else None,
        kl_trace=Path(args.kl_trace) if args.kl_trace else None,
        scene_json=Path(args.scene_json) if args.scene_json else None,
    )

    corpus = None
    if not cfg.no_corpus:
        if cfg.sketch_path is None:
            print("error: --sketch is required unless --no-corpus is set", file=sys.stderr)
            return USAGE_ERROR
        try:
            corpus = sketch.load(cfg.sketch_path)
        except (OSError, sketch.SketchFormatError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return INPUT_ERROR

    try:
        text = cfg.doc_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR

    try:
        result = build_scene(text, corpus, cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR

    cfg.out_path.write_text(result.svg, encoding="utf-8")
    if cfg.scores_tsv is not None:
        with open(cfg.scores_tsv, "w", encoding="utf-8") as fh:
            scoring.write_scores_tsv(fh, result.terms, result.pairs)
    if cfg.kl_trace is not None:
        with open(cfg.kl_trace, "w", encoding="utf-8") as fh:
            fh.write("iteration,kl\n")
            for iteration, kl in result.layout.trace:
                fh.write(f"{iteration},{kl:.9g}\n")
    if cfg.scene_json is not None:
        cfg.scene_json.write_text(render.scene_to_json(result.scene), encoding="utf-8")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semcloud",
        description="Semantic word clouds with background-corpus normalization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("build-sketch", help="summarize a corpus directory into a sketch file")
    ps.add_argument("corpus_dir", help="directory of UTF-8 text files")
    ps.add_argument("-o", "--out", required=True, help="output sketch path")
    ps.add_argument("--buckets", type=int, default=DESK_DEFAULT_BUCKETS,
                    help="bucket count, power of two (default 2^20; use 2^26 for a full-size corpus)")
    ps.add_argument("--hashes", type=int, default=4, help="number of hash functions")
    ps.add_argument("--hash-seed", type=int, default=0, help="64-bit hash seed")
    ps.add_argument("--sigma", type=float, default=4.0, help="pair distance bandwidth")
    ps.add_argument("--max-pair-distance", type=int, default=16,
                    help="ignore pairs further apart than this")
    ps.add_argument("--stoplist", default=None, help="stopword file (one word per line)")
    ps.add_argument("--strip-suffixes", action="store_true", help="strip plural suffixes")
    ps.add_argument("--records", action="store_true",
                    help="treat blank-line-separated blocks as separate documents")
    ps.set_defaults(func=cmd_build_sketch)

    pr = sub.add_parser("render", help="render a document as a word-cloud SVG")
    pr.add_argument("document", help="UTF-8 text file to visualize")
    pr.add_argument("-o", "--out", required=True, help="output SVG path")
    pr.add_argument("--sketch", default=None, help="corpus sketch file")
    pr.add_argument("--no-corpus", action="store_true",
                    help="ignore corpus frequencies (pure document-frequency mode)")
    pr.add_argument("-k", type=int, default=70, help="number of words to select")
    pr.add_argument("--seed", type=int, default=0, help="layout random seed")
    pr.add_argument("--sigma", type=float, default=4.0, help="pair distance bandwidth")
    pr.add_argument("--max-pair-distance", type=int, default=16)
    pr.add_argument("--beta-c", type=float, default=None,
                    help="corpus bias constant (default 1/doc_count)")
    pr.add_argument("--clusters", type=int, default=8, help="maximum cluster count")
    pr.add_argument("--iters", type=int, default=1000, help="optimizer iterations")
    pr.add_argument("--eta", type=float, default=100.0, help="optimizer learning rate")
    pr.add_argument("--exaggeration", type=float, default=4.0,
                    help="early affinity exaggeration factor")
    pr.add_argument("--step-fraction", type=float, default=0.05,
                    help="compression move size")
    pr.add_argument("--max-rounds", type=int, default=200, help="compression round cap")
    pr.add_argument("--edge-threshold", type=float, default=0.5,
                    help="minimum pair probability for a drawn connection")
    pr.add_argument("--min-p", type=float, default=None,
                    help="drop selected terms below this probability")
    pr.add_argument("--canvas", type=_parse_canvas, default=(1280, 800),
                    help="canvas size, e.g. 1280x800")
    pr.add_argument("--stoplist", default=None, help="stopword file")
    pr.add_argument("--strip-suffixes", action="store_true")
    pr.add_argument("--distance-basis", choices=("postfilter", "prefilter"),
                    default="postfilter",
                    help="token positions used for pair distances")
    pr.add_argument("--no-prior-in-selection", action="store_true",
                    help="mix bare pair ratios into the selection maximum")
    pr.add_argument("--scores-tsv", default=None, help="write term scores as TSV")
    pr.add_argument("--kl-trace", default=None, help="write the KL trace as CSV")
    pr.add_argument("--scene-json", default=None, help="write the scene as JSON")
    pr.set_defaults(func=cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
