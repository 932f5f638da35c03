"""Clustering tests: incremental linkage vs naive recomputation, cut rule vs
exhaustive prefix search."""

from __future__ import annotations

import numpy as np
import pytest

from semcloud.cluster import OUTLIER, Dendrogram, Merge, cut_nonsingleton, upgma


def random_integer_affinity(rng: np.random.Generator, n: int) -> np.ndarray:
    # Integer- valued affinities keep every cross-cluster sum exact in floats,
    # so the incremental update and naive recomputation must agree verbatim.
    raw = rng.integers(0, 100, size=(n, n)).astype(np.float64)
    p = raw + raw.T
    np.fill_diagonal(p, 0.0)
    return p


def naive_upgma(p: np.ndarray) -> list[tuple[int, int, float, int]]:
    """From-scratch group-average agglomeration used as the oracle."""
    n = p.shape[0]
    clusters: dict[int, list[int]] = {i: [i] for i in range(n)}
    merges = []
    for step in range(n - 1):
        ids = sorted(clusters)
        best = None
        best_mean = -np.inf
        for ai, a in enumerate(ids):
            for b in ids[ai + 1 :]:
                total = sum(p[x, y] for x in clusters[a] for y in clusters[b])
                mean = total / (len(clusters[a]) * len(clusters[b]))
                if mean > best_mean:
                    best_mean = mean
                    best = (a, b)
        a, b = best
        node = n + step
        clusters[node] = clusters.pop(a) + clusters.pop(b)
        merges.append((a, b, best_mean, len(clusters[node])))
    return merges


def partition_of(labels: tuple[int, ...]) -> set[frozenset[int]]:
    groups: dict[int, set[int]] = {}
    singles = []
    for leaf, label in enumerate(labels):
        if label == OUTLIER:
            singles.append(frozenset([leaf]))
        else:
            groups.setdefault(label, set()).add(leaf)
    return {frozenset(g) for g in groups.values()} | set(singles)


def brute_force_cut(dendrogram: Dendrogram, k: int) -> set[frozenset[int]]:
    """Enumerate every merge prefix and apply the selection rule directly."""
    n = dendrogram.n_leaves
    candidates = []
    for prefix in range(len(dendrogram.merges) + 1):
        members: dict[int, frozenset[int]] = {i: frozenset([i]) for i in range(n)}
        for step, merge in enumerate(dendrogram.merges[:prefix]):
            members[n + step] = members.pop(merge.left) | members.pop(merge.right)
        parts = set(members.values())
        nonsingleton = sum(1 for g in parts if len(g) >= 2)
        candidates.append((prefix, nonsingleton, parts))
    exact = [c for c in candidates if c[1] == k]
    if exact:
        chosen = max(exact, key=lambda c: c[0])
    else:
        best = max(c[1] for c in candidates)
        chosen = max((c for c in candidates if c[1] == best), key=lambda c: c[0])
    return chosen[2]


class TestUpgma:
    def test_two_leaves(self):
        p = np.array([[0.0, 0.7], [0.7, 0.0]])
        d = upgma(p)
        assert d.n_leaves == 2
        assert d.merges == (Merge(left=0, right=1, affinity=0.7, size=2),)

    def test_four_point_hand_trace(self):
        # ab strongest, cd next, then the pair of pairs at the background level.
        p = np.full((4, 4), 0.1)
        p[0, 1] = p[1, 0] = 0.9
        p[2, 3] = p[3, 2] = 0.8
        np.fill_diagonal(p, 0.0)
        d = upgma(p)
        assert (d.merges[0].left, d.merges[0].right) == (0, 1)
        assert d.merges[0].affinity == pytest.approx(0.9)
        assert (d.merges[1].left, d.merges[1].right) == (2, 3)
        assert d.merges[1].affinity == pytest.approx(0.8)
        assert (d.merges[2].left, d.merges[2].right) == (4, 5)
        assert d.merges[2].affinity == pytest.approx(0.1)
        assert d.merges[2].size == 4

    def test_matches_naive_recomputation_exactly(self):
        rng = np.random.default_rng(30)
        for _ in range(200):
            n = int(rng.integers(2, 13))
            p = random_integer_affinity(rng, n)
            fast = upgma(p)
            slow = naive_upgma(p)
            assert len(fast.merges) == len(slow)
            for got, want in zip(fast.merges, slow):
                assert (got.left, got.right) == (want[0], want[1])
                assert got.affinity == want[2]  # exact, not approximate
                assert got.size == want[3]

    def test_tie_break_smallest_pair(self):
        p = np.ones((3, 3))
        np.fill_diagonal(p, 0.0)
        d = upgma(p)
        assert (d.merges[0].left, d.merges[0].right) == (0, 1)

    def test_rejects_single_leaf(self):
        with pytest.raises(ValueError):
            upgma(np.zeros((1, 1)))


class TestCutNonsingleton:
    def test_single_leaf_is_outlier(self):
        d = Dendrogram(n_leaves=1, merges=())
        cut = cut_nonsingleton(d, 8)
        assert cut.labels == (OUTLIER,)
        assert cut.num_clusters == 0

    def test_four_points_two_clusters(self):
        p = np.full((4, 4), 0.1)
        p[0, 1] = p[1, 0] = 0.9
        p[2, 3] = p[3, 2] = 0.8
        np.fill_diagonal(p, 0.0)
        cut = cut_nonsingleton(upgma(p), 2)
        assert partition_of(cut.labels) == {frozenset({0, 1}), frozenset({2, 3})}
        assert cut.num_clusters == 2
        assert OUTLIER not in cut.labels

    def test_chain_yields_single_cluster(self):
        # Each merge attaches one more singleton, so no prefix ever holds two
        # clusters of two; the rule settles on one cluster and no outliers.
        for n in range(2, 9):
            p = np.zeros((n, n))
            for i in range(n):
                for j in range(n):
                    if i != j:
                        p[i, j] = 1.0 / (1 + min(i, j) + 10 * abs(i - j))
            d = upgma(p)
            cut = cut_nonsingleton(d, 8)
            sizes = sorted(
                len(g) for g in partition_of(cut.labels) if len(g) >= 2
            )
            assert cut.num_clusters >= 1
            got = brute_force_cut(d, 8)
            assert partition_of(cut.labels) == got

    def test_matches_bruteforce_prefix_search(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            n = int(rng.integers(2, 13))
            k = int(rng.integers(1, 9))
            d = upgma(random_integer_affinity(rng, n))
            cut = cut_nonsingleton(d, k)
            assert partition_of(cut.labels) == brute_force_cut(d, k)
            assert cut.num_clusters <= k
            sizes = [len(g) for g in partition_of(cut.labels)]
            assert all(
                size >= 2
                for g, size in zip(partition_of(cut.labels), sizes)
                if any(cut.labels[leaf] != OUTLIER for leaf in g)
            )

    def test_permutation_stability(self):
        rng = np.random.default_rng(32)
        p = random_integer_affinity(rng, 9)
        # Break ties so the clustering is permutation-equivariant.
        noise = rng.uniform(0, 0.5, size=(9, 9))
        p = p + noise + noise.T
        np.fill_diagonal(p, 0.0)
        base = cut_nonsingleton(upgma(p), 3)
        perm = rng.permutation(9)
        permuted = p[np.ix_(perm, perm)]
        shuffled = cut_nonsingleton(upgma(permuted), 3)
        mapped = [None] * 9
        for new_index, old_index in enumerate(perm):
            mapped[old_index] = shuffled.labels[new_index]
        assert partition_of(tuple(mapped)) == partition_of(base.labels)

    def test_rejects_bad_k(self):
        d = Dendrogram(n_leaves=1, merges=())
        with pytest.raises(ValueError):
            cut_nonsingleton(d, 0)

    def test_every_nonsingleton_cluster_has_two_members(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            n = int(rng.integers(3, 12))
            cut = cut_nonsingleton(upgma(random_integer_affinity(rng, n)), 4)
            counts: dict[int, int] = {}
            for label in cut.labels:
                if label != OUTLIER:
                    counts[label] = counts.get(label, 0) + 1
            assert all(c >= 2 for c in counts.values())
            assert len(counts) == cut.num_clusters
