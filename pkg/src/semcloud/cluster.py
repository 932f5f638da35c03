"""Group-average agglomerative clustering on the affinity matrix.

Works directly with similarities (larger is closer), greedily merging the
pair of clusters with the highest average pairwise affinity. Cross-affinity
totals are carried incrementally, which reproduces from-scratch averages
exactly instead of accumulating rounding from repeated weighted means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OUTLIER = -1


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    affinity: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Leaves 0..n-1; merge k creates node n+k."""

    n_leaves: int
    merges: tuple[Merge, ...]


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-leaf cluster label; OUTLIER marks singletons left out of clusters."""

    labels: tuple[int, ...]
    num_clusters: int


def upgma(affinity: np.ndarray) -> Dendrogram:
    """Greedy max-affinity agglomeration with group-average linkage.

    The affinity between clusters is the mean of their cross pairs; ties
    pick the lexicographically smallest (left, right) node-id pair.
    """
    p = np.asarray(affinity, dtype=np.float64)
    n = p.shape[0]
    if n < 2 or p.shape[1] != n:
        raise ValueError("need a square affinity matrix with n >= 2")
    total_nodes = 2 * n - 1
    cross = np.zeros((total_nodes, total_nodes), dtype=np.float64)
    cross[:n, :n] = p
    sizes = np.ones(total_nodes, dtype=np.int64)
    active = list(range(n))
    merges: list[Merge] = []
    for step in range(n - 1):
        best_pair: tuple[int, int] | None = None
        best_mean = -np.inf
        for a_pos, a in enumerate(active):
            for b in active[a_pos + 1 :]:
                mean = cross[a, b] / (sizes[a] * sizes[b])
                if mean > best_mean:
                    best_mean = mean
                    best_pair = (a, b)
        assert best_pair is not None
        left, right = best_pair
        node = n + step
        sizes[node] = sizes[left] + sizes[right]
        for c in active:
            if c in (left, right):
                continue
            total = cross[left, c] + cross[right, c]
            cross[node, c] = total
            cross[c, node] = total
        active.remove(left)
        active.remove(right)
        active.append(node)
        merges.append(Merge(left=left, right=right, affinity=float(best_mean), size=int(sizes[node])))
    return Dendrogram(n_leaves=n, merges=tuple(merges))


def cut_nonsingleton(dendrogram: Dendrogram, k: int) -> ClusterAssignment:
    """Cut the merge sequence to get up to k clusters of 2+ points.

    Scans every prefix of the merge sequence and counts clusters with at
    least two members. If some prefix reaches exactly k such clusters, the
    longest one wins (fewest merges undone); otherwise the longest prefix
    with the highest achievable count wins. Leaves left as singletons are
    labeled OUTLIER.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n = dendrogram.n_leaves
    sizes: dict[int, int] = {i: 1 for i in range(n)}
    nonsingleton = 0
    counts = [0]
    for step, merge in enumerate(dendrogram.merges):
        left_size = sizes.pop(merge.left)
        right_size = sizes.pop(merge.right)
        new_size = left_size + right_size
        sizes[n + step] = new_size
        nonsingleton += (new_size >= 2) - (left_size >= 2) - (right_size >= 2)
        counts.append(nonsingleton)

    exact = [m for m, c in enumerate(counts) if c == k]
    if exact:
        chosen = max(exact)
    else:
        best = max(counts)
        chosen = max(m for m, c in enumerate(counts) if c == best)

    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for step, merge in enumerate(dendrogram.merges[:chosen]):
        merged = members.pop(merge.left) + members.pop(merge.right)
        members[n + step] = merged

    labels = [OUTLIER] * n
    clusters = sorted(
        (group for group in members.values() if len(group) >= 2), key=min
    )
    for label, group in enumerate(clusters):
        for leaf in group:
            labels[leaf] = label
    return ClusterAssignment(labels=tuple(labels), num_clusters=len(clusters))
