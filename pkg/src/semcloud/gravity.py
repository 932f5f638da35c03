"""Gravity-based compaction of word bounding boxes.

Embedding output spreads words far apart, wasting space and forcing tiny
fonts. Compression alternates two steps: grow the shared scale of all boxes
as far as possible without overlap, then pull words toward rotating gravity
centers, refusing any single move that would make boxes collide. Distances
between words distort a little, but white space shrinks and the shared font
scale grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SCALE_CAP = 1e6


@dataclass
class WordBox:
    """Axis-aligned box for one word: center plus half extents at unit scale."""

    index: int
    center: np.ndarray
    half_extent: np.ndarray


@dataclass(frozen=True)
class CompressOpts:
    """Iteration parameters.

    step_fraction is the per-move pull toward the gravity center as a
    fraction of the distance; moves smaller than move_tolerance of the
    initial layout diagonal end the loop. padding_fraction keeps a small
    gap (relative to the same diagonal) between boxes when testing moves.
    """

    step_fraction: float = 0.05
    max_rounds: int = 200
    move_tolerance: float = 1e-3
    padding_fraction: float = 0.002
    scale_cap: float = DEFAULT_SCALE_CAP


@dataclass
class CompressionResult:
    boxes: list[WordBox]
    scale: float
    iterations: int


def boxes_overlap(
    center_a: np.ndarray,
    half_a: np.ndarray,
    center_b: np.ndarray,
    half_b: np.ndarray,
    scale: float = 1.0,
    padding: float = 0.0,
) -> bool:
    """Strict interior intersection test with half extents scaled by `scale`."""
    dx = abs(center_a[0] - center_b[0])
    dy = abs(center_a[1] - center_b[1])
    return dx < scale * (half_a[0] + half_b[0]) + padding and dy < scale * (
        half_a[1] + half_b[1]
    ) + padding


def any_overlap(boxes: list[WordBox], scale: float) -> bool:
    """True if any pair of boxes overlaps at the given scale."""
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if boxes_overlap(
                boxes[i].center, boxes[i].half_extent, boxes[j].center, boxes[j].half_extent, scale
            ):
                return True
    return False


def _separate_coincident(centers: np.ndarray) -> np.ndarray:
    """Deterministically jitter exactly coincident centers apart by 1e-6 steps."""
    centers = centers.astype(np.float64, copy=True)
    seen: dict[tuple[float, float], int] = {}
    for i in range(centers.shape[0]):
        key = (float(centers[i, 0]), float(centers[i, 1]))
        while key in seen:
            centers[i] += 1e-6 * (i + 1)
            key = (float(centers[i, 0]), float(centers[i, 1]))
        seen[key] = i
    return centers


def _pairwise_limits(centers: np.ndarray, half: np.ndarray):
    n = centers.shape[0]
    iu, ju = np.triu_indices(n, 1)
    adx = np.abs(centers[iu, 0] - centers[ju, 0])
    ady = np.abs(centers[iu, 1] - centers[ju, 1])
    wsum = half[iu, 0] + half[ju, 0]
    hsum = half[iu, 1] + half[ju, 1]
    return adx, ady, wsum, hsum


def _max_scale_arrays(centers: np.ndarray, half: np.ndarray, cap: float) -> float:
    if centers.shape[0] == 1:
        return cap
    adx, ady, wsum, hsum = _pairwise_limits(centers, half)

    def no_overlap(s: float) -> bool:
        return bool(np.all((adx >= s * wsum) | (ady >= s * hsum)))

    if no_overlap(cap):
        return cap
    lo = 1.0
    while not no_overlap(lo):
        lo *= 0.5
        if lo < 1e-30:
            return 0.0
    hi = min(2.0 * lo, cap)
    while no_overlap(hi):
        lo = hi
        hi = min(2.0 * hi, cap)
    while hi - lo > 1e-4 * lo:
        mid = 0.5 * (lo + hi)
        if no_overlap(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_scale(boxes: list[WordBox], cap: float = DEFAULT_SCALE_CAP) -> float:
    """Largest shared scale at which no two boxes overlap.

    Found by binary search to relative precision 1e-4 against the pairwise
    overlap predicate; the returned scale is one that verified overlap-free.
    A single box is unconstrained and returns the cap. Coincident centers
    are jittered apart deterministically before searching.
    """
    if not boxes:
        raise ValueError("need at least one box")
    centers = _separate_coincident(np.array([b.center for b in boxes], dtype=np.float64))
    half = np.array([b.half_extent for b in boxes], dtype=np.float64)
    return _max_scale_arrays(centers, half, cap)


def compress(boxes: list[WordBox], opts: CompressOpts = CompressOpts()) -> CompressionResult:
    """Iteratively rescale and pull words together; input boxes are not mutated.

    Gravity centers cycle through the boxes in list order, so callers should
    pass boxes sorted by importance. For each center, the remaining words
    are processed nearest first and moved by step_fraction of their distance
    toward it, unless that move would collide with any box at the current
    scale (plus padding). The no-overlap invariant therefore holds after
    every round, and the scale never decreases between rounds.
    """
    if not boxes:
        raise ValueError("need at least one box")
    centers = _separate_coincident(np.array([b.center for b in boxes], dtype=np.float64))
    half = np.array([b.half_extent for b in boxes], dtype=np.float64)
    n = len(boxes)

    hull_lo = (centers - half).min(axis=0)
    hull_hi = (centers + half).max(axis=0)
    diagonal = float(np.hypot(*(hull_hi - hull_lo)))
    if diagonal <= 0.0:
        diagonal = 1.0
    padding = opts.padding_fraction * diagonal
    threshold = opts.move_tolerance * diagonal

    hw_sum = half[:, 0][:, None] + half[None, :, 0]
    hh_sum = half[:, 1][:, None] + half[None, :, 1]
    cx = centers[:, 0]
    cy = centers[:, 1]
    rounds = 0
    for _ in range(opts.max_rounds):
        scale = _max_scale_arrays(centers, half, opts.scale_cap)
        rounds += 1
        # Per-round collision limits; a negative diagonal makes self-hits impossible.
        wlim = scale * hw_sum + padding
        hlim = scale * hh_sum + padding
        np.fill_diagonal(wlim, -1.0)
        largest_move = 0.0
        for g in range(n):
            gx, gy = centers[g]
            order = np.argsort((cx - gx) ** 2 + (cy - gy) ** 2, kind="stable")
            for i in order:
                if i == g:
                    continue
                step_x = (gx - cx[i]) * opts.step_fraction
                step_y = (gy - cy[i]) * opts.step_fraction
                hit = (np.abs(cx[i] + step_x - cx) < wlim[i]) & (
                    np.abs(cy[i] + step_y - cy) < hlim[i]
                )
                if not hit.any():
                    cx[i] += step_x
                    cy[i] += step_y
                    moved = math.hypot(step_x, step_y)
                    if moved > largest_move:
                        largest_move = moved
        if largest_move <= threshold:
            break

    final_scale = _max_scale_arrays(centers, half, opts.scale_cap)
    out = [
        WordBox(index=b.index, center=centers[i].copy(), half_extent=np.array(b.half_extent, dtype=np.float64))
        for i, b in enumerate(boxes)
    ]
    return CompressionResult(boxes=out, scale=final_scale, iterations=rounds)
