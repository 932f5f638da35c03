"""Scene assembly and SVG serialization.

A scene is the compressed box layout mapped onto a pixel canvas: words with
font-size fractions and cluster colors, plus low-opacity connection lines
between significantly cooccurring pairs. Output is drawn in two layers,
lines below, words on top. Serialization is fully deterministic: fixed
float formatting, fixed attribute order, bundled glyph metrics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .cluster import OUTLIER, ClusterAssignment
from .glyphs import LINE_HEIGHT, text_width
from .gravity import CompressionResult, WordBox
from .scoring import ScoredPair, ScoredTerm

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#17becf",
)
OUTLIER_COLOR = "#808080"
BACKGROUND_COLOR = "#ffffff"

MIN_FONT_FRACTION = 0.2


def font_size(score: float, min_score: float, max_score: float) -> float:
    """Font-size fraction in [0.2, 1.0] for a score between min and max.

    Square-root scaling, since perceived weight goes with glyph area; the
    floor keeps the least significant word legible. Degenerate ranges map
    to full size.
    """
    if max_score == min_score:
        return 1.0
    t = (score - min_score) / (max_score - min_score)
    return math.sqrt(t) * (1.0 - MIN_FONT_FRACTION) + MIN_FONT_FRACTION


def term_fractions(terms: list[ScoredTerm]) -> list[float]:
    """Font-size fraction per term from its selection score."""
    lo = min(t.s for t in terms)
    hi = max(t.s for t in terms)
    return [font_size(t.s, lo, hi) for t in terms]


def make_word_boxes(terms: list[ScoredTerm], positions: np.ndarray) -> list[WordBox]:
    """Unit-scale bounding boxes for terms placed at layout positions."""
    fractions = term_fractions(terms)
    boxes = []
    for i, (term, fraction) in enumerate(zip(terms, fractions)):
        half_w = fraction * text_width(term.word) / 2.0
        half_h = fraction * LINE_HEIGHT / 2.0
        boxes.append(
            WordBox(
                index=i,
                center=np.asarray(positions[i], dtype=np.float64).copy(),
                half_extent=np.array([half_w, half_h], dtype=np.float64),
            )
        )
    return boxes


@dataclass(frozen=True)
class SceneOpts:
    canvas_width: int = 1280
    canvas_height: int = 800
    margin_fraction: float = 0.02
    edge_threshold: float = 0.5
    edge_opacity: float = 0.35


@dataclass(frozen=True)
class PlacedWord:
    text: str
    x: float
    y: float
    fraction: float
    color: str


@dataclass(frozen=True)
class SceneEdge:
    i: int
    j: int
    opacity: float


@dataclass
class CloudScene:
    width: int
    height: int
    base_size: float
    words: list[PlacedWord] = field(default_factory=list)
    edges: list[SceneEdge] = field(default_factory=list)


def assemble(
    compressed: CompressionResult,
    terms: list[ScoredTerm],
    pairs: list[ScoredPair],
    clusters: ClusterAssignment,
    opts: SceneOpts = SceneOpts(),
) -> CloudScene:
    """Fit the compressed layout onto the canvas and attach colors and edges.

    The box hull is mapped with a uniform scale and centered, leaving the
    configured margin. Edges are kept for pairs whose probability clears the
    threshold; endpoints index into the word list.
    """
    if len(compressed.boxes) != len(terms):
        raise ValueError("boxes and terms must align")
    scale = compressed.scale
    centers = np.array([b.center for b in compressed.boxes], dtype=np.float64)
    extents = scale * np.array([b.half_extent for b in compressed.boxes], dtype=np.float64)
    hull_lo = (centers - extents).min(axis=0)
    hull_hi = (centers + extents).max(axis=0)
    hull_size = np.maximum(hull_hi - hull_lo, 1e-12)
    hull_center = 0.5 * (hull_lo + hull_hi)

    usable = 1.0 - 2.0 * opts.margin_fraction
    zoom = min(
        usable * opts.canvas_width / hull_size[0],
        usable * opts.canvas_height / hull_size[1],
    )
    canvas_center = np.array([opts.canvas_width / 2.0, opts.canvas_height / 2.0])

    fractions = term_fractions(terms)
    index_by_word = {t.word: i for i, t in enumerate(terms)}
    words = []
    for box in compressed.boxes:
        term = terms[box.index]
        label = clusters.labels[box.index]
        color = OUTLIER_COLOR if label == OUTLIER else PALETTE[label % len(PALETTE)]
        anchor = canvas_center + zoom * (box.center - hull_center)
        words.append(
            PlacedWord(
                text=term.word,
                x=float(anchor[0]),
                y=float(anchor[1]),
                fraction=fractions[box.index],
                color=color,
            )
        )

    edges = []
    for pair in pairs:
        if pair.p < opts.edge_threshold:
            continue
        i = index_by_word.get(pair.a)
        j = index_by_word.get(pair.b)
        if i is None or j is None:
            continue
        edges.append(SceneEdge(i=i, j=j, opacity=opts.edge_opacity))
    edges.sort(key=lambda e: (e.i, e.j))

    return CloudScene(
        width=opts.canvas_width,
        height=opts.canvas_height,
        base_size=float(zoom * scale),
        words=words,
        edges=edges,
    )


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def to_svg(scene: CloudScene) -> str:
    """Serialize a scene as standalone SVG 1.1 text.

    Connection lines take the color of their first endpoint's word. Text is
    middle-anchored at the word anchor; the baseline shift is expressed as a
    relative dy so the anchor can be read back from the x/y attributes.
    """
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{scene.width}" height="{scene.height}" '
        f'viewBox="0 0 {scene.width} {scene.height}">',
        f'<rect width="{scene.width}" height="{scene.height}" fill="{BACKGROUND_COLOR}"/>',
        '<g stroke-width="2">',
    ]
    for edge in scene.edges:
        a = scene.words[edge.i]
        b = scene.words[edge.j]
        lines.append(
            f'<line x1="{_fmt(a.x)}" y1="{_fmt(a.y)}" x2="{_fmt(b.x)}" y2="{_fmt(b.y)}" '
            f'stroke="{a.color}" stroke-opacity="{_fmt(edge.opacity)}"/>'
        )
    lines.append("</g>")
    lines.append('<g font-family="Helvetica, Arial, sans-serif" text-anchor="middle">')
    for word in scene.words:
        size = word.fraction * scene.base_size
        lines.append(
            f'<text x="{_fmt(word.x)}" y="{_fmt(word.y)}" dy="0.35em" '
            f'font-size="{_fmt(size)}" fill="{word.color}">{escape(word.text)}</text>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def scene_to_json(scene: CloudScene) -> str:
    """Stable JSON dump of a scene for downstream tooling."""
    payload = {
        "canvas": {"width": scene.width, "height": scene.height},
        "base_size": scene.base_size,
        "words": [
            {
                "text": w.text,
                "x": w.x,
                "y": w.y,
                "size_fraction": w.fraction,
                "color": w.color,
            }
            for w in scene.words
        ],
        "edges": [
            {"source": e.i, "target": e.j, "opacity": e.opacity} for e in scene.edges
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
