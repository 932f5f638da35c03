"""2-D embedding of term affinities by gradient descent on KL divergence.

The input distribution P comes from pair significance probabilities rather
than a distance kernel; the output distribution Q is the usual Student-t
neighborhood. Isolated terms (all-zero affinity rows) are kept as-is; the
downstream compression stage deals with the extra spread they cause.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .scoring import ScoredPair

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass
class AffinityMatrix:
    """Symmetric non-negative affinities with zero diagonal, off-diagonal sum 1."""

    p: np.ndarray

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def validate(self, tol: float = 1e-9) -> None:
        p = self.p
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("affinity matrix must be square")
        if not np.allclose(p, p.T, rtol=0.0, atol=tol):
            raise ValueError("affinity matrix must be symmetric")
        if np.any(np.diag(p) != 0.0):
            raise ValueError("affinity diagonal must be zero")
        if np.any(p < 0.0):
            raise ValueError("affinities must be non-negative")
        if abs(p.sum() - 1.0) > tol:
            raise ValueError("affinities must sum to 1")


def build_affinities(words: Sequence[str], pairs: Iterable[ScoredPair]) -> AffinityMatrix:
    """Affinity matrix over `words` from scored pair probabilities.

    Entries default to zero for unscored pairs; the whole matrix is rescaled
    to total 1. If every pair probability is zero, affinities fall back to
    uniform so the embedding still has a defined objective.
    """
    n = len(words)
    if n < 2:
        raise ValueError("need at least 2 terms to build affinities")
    index = {word: i for i, word in enumerate(words)}
    p = np.zeros((n, n), dtype=np.float64)
    for pair in pairs:
        i, j = index[pair.a], index[pair.b]
        if i == j:
            continue
        p[i, j] = pair.p
        p[j, i] = pair.p
    np.fill_diagonal(p, 0.0)
    total = p.sum()
    if total > 0.0:
        p /= total
    else:
        p = np.full((n, n), 1.0 / (n * (n - 1)), dtype=np.float64)
        np.fill_diagonal(p, 0.0)
    return AffinityMatrix(p=p)


def _student_t_weights(y: np.ndarray) -> np.ndarray:
    diff = y[:, None, :] - y[None, :, :]
    w = 1.0 / (1.0 + np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(w, 0.0)
    return w


def q_and_z(y: np.ndarray) -> tuple[np.ndarray, float]:
    """Student-t neighborhood distribution of a layout and its normalizer Z."""
    if y.shape[0] < 2:
        raise ValueError("need at least 2 points")
    w = _student_t_weights(y)
    z = float(w.sum())
    return w / z, z


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    """KL(P || Q) for the layout y, with 0 log 0 taken as 0."""
    q, _ = q_and_z(y)
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of KL(P || Q) with respect to each point.

    Per point i: 4 * sum_j (p_ij - q_ij) * q_ij * Z * (y_i - y_j); the
    product q_ij * Z is the unnormalized Student-t weight.
    """
    diff = y[:, None, :] - y[None, :, :]
    w = 1.0 / (1.0 + np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(w, 0.0)
    q = w / w.sum()
    coef = 4.0 * (p - q) * w
    return np.einsum("ij,ijk->ik", coef, diff)


@dataclass(frozen=True)
class TsneOpts:
    """Optimizer settings; none of these have canonical values, so they are
    all surfaced as CLI flags."""

    iters: int = 1000
    eta: float = 100.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch: int = 250
    exaggeration: float = 4.0
    exaggeration_iters: int = 100
    seed: int = 0
    kl_every: int = 50
    init_std: float = 1e-2  # variance 1e-4
    stretch: float = GOLDEN_RATIO


@dataclass
class Layout:
    """Final point positions with the KL trace recorded during optimization."""

    y: np.ndarray
    iteration: int
    kl: float
    trace: list[tuple[int, float]] = field(default_factory=list)


def optimize(affinities: AffinityMatrix, opts: TsneOpts = TsneOpts()) -> Layout:
    """Gradient descent with momentum from a small Gaussian initialization.

    The affinity matrix is exaggerated for the first iterations to form
    clusters early; reported KL always uses the true affinities. After the
    loop the x axis is stretched by the golden ratio for a landscape aspect.
    """
    n = affinities.n
    if n < 2:
        raise ValueError("need at least 2 points to optimize")
    p = affinities.p
    rng = np.random.default_rng(opts.seed)
    y = rng.normal(0.0, opts.init_std, size=(n, 2))
    y_prev = y.copy()
    trace: list[tuple[int, float]] = []
    for t in range(1, opts.iters + 1):
        p_eff = p * opts.exaggeration if t <= opts.exaggeration_iters else p
        g = gradient(p_eff, y)
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient at iteration {t}")
        alpha = opts.momentum_early if t <= opts.momentum_switch else opts.momentum_late
        y_next = y - opts.eta * g + alpha * (y - y_prev)
        y_prev, y = y, y_next
        if t % opts.kl_every == 0 or t == opts.iters:
            kl = kl_divergence(p, y)
            if not trace or trace[-1][0] != t:
                trace.append((t, kl))
    final_kl = trace[-1][1] if trace else kl_divergence(p, y)
    y = y.copy()
    y[:, 0] *= opts.stretch
    return Layout(y=y, iteration=opts.iters, kl=final_kl, trace=trace)
