"""Shared graph builders and independent brute-force oracles.

The oracles work on raw edge arrays with python sets and explicit loops so
they share no code path with the library implementations they check.
"""

from __future__ import annotations

import numpy as np

from activescan import Graph


# ---------------------------------------------------------------------------
# builders

def tri_graph() -> Graph:
    return Graph.from_edges(3, [0, 1, 2], [1, 2, 0])


def er_graph(n: int, p: float, seed: int) -> tuple[Graph, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return Graph.from_edges(n, src, dst), src, dst


def planted_clique_graph(n: int, p: float, clique: int,
                         seed: int) -> tuple[Graph, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    members = rng.choice(n, size=clique, replace=False)
    mask[np.ix_(members, members)] = True
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return Graph.from_edges(n, src, dst), src, dst


def triangles_graph(n: int) -> tuple[Graph, np.ndarray, np.ndarray]:
    """Disjoint directed 3-cycles: every vertex ties at statistic 3."""
    n = (n // 3) * 3
    base = np.arange(0, n, 3)
    src = np.concatenate([base, base + 1, base + 2])
    dst = np.concatenate([base + 1, base + 2, base])
    return Graph.from_edges(n, src, dst), src, dst


def preferential_attachment(n: int, attach: int = 3, seed: int = 7) -> Graph:
    rng = np.random.default_rng(seed)
    src, dst = [], []
    pool = [0]  # endpoint pool repeats vertices once per incident edge
    for v in range(1, n):
        picks = set()
        for _ in range(min(attach, v)):
            picks.add(int(pool[rng.integers(len(pool))]))
        for u in picks:
            src.append(v)
            dst.append(u)
            pool.append(u)
        pool.append(v)
    return Graph.from_edges(n, np.array(src), np.array(dst))


# ---------------------------------------------------------------------------
# oracles over raw edge arrays

def undirected_adj(n: int, src, dst) -> list[set]:
    adj = [set() for _ in range(n)]
    for a, b in zip(src, dst):
        if a != b:
            adj[int(a)].add(int(b))
            adj[int(b)].add(int(a))
    return adj


def bfs_set(adj: list[set], v: int, k: int) -> set:
    seen = {v}
    frontier = {v}
    for _ in range(k):
        nxt = set()
        for u in frontier:
            nxt |= adj[u]
        frontier = nxt - seen
        seen |= frontier
    return seen


def count_edges_within(src, dst, members: set) -> int:
    """Naive scan over every directed edge."""
    total = 0
    for a, b in zip(src, dst):
        if a != b and int(a) in members and int(b) in members:
            total += 1
    return total


def psi_oracle(n: int, src, dst, v: int, k: int) -> int:
    if k == 0:
        return sum(1 for a, b in zip(src, dst) if a != b and v in (int(a), int(b)))
    adj = undirected_adj(n, src, dst)
    return count_edges_within(src, dst, bfs_set(adj, v, k))


def jaccard_oracle(n: int, src, dst, vi: int, vj: int, k: int) -> float:
    adj = undirected_adj(n, src, dst)
    a = bfs_set(adj, vi, k)
    b = bfs_set(adj, vj, k)
    return len(a & b) / len(a | b)


def ari_oracle(labels_a, labels_b) -> float:
    """Pair-counting form over all C(n,2) pairs."""
    a = list(labels_a)
    b = list(labels_b)
    n = len(a)
    n00 = n01 = n10 = n11 = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_a = a[i] == a[j]
            same_b = b[i] == b[j]
            if same_a and same_b:
                n11 += 1
            elif same_a:
                n10 += 1
            elif same_b:
                n01 += 1
            else:
                n00 += 1
    num = 2.0 * (n11 * n00 - n10 * n01)
    den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00)
    if den == 0:
        return 1.0
    return num / den


def auc_oracle(scores, positive) -> float:
    """Probability a random positive outranks a random negative, ties 1/2."""
    pos = [s for s, y in zip(scores, positive) if y]
    neg = [s for s, y in zip(scores, positive) if not y]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (len(pos) * len(neg))
