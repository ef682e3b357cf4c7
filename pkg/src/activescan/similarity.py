"""Jaccard similarity matrix over a set of selected vertices."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, neighborhood

# Cached neighborhood entries allowed per block; large enough that typical
# selections are processed in a single block.
DEFAULT_CACHE_ENTRIES = 50_000_000


@dataclass
class SimilarityMatrix:
    """Symmetric matrix of pairwise Jaccard values with unit diagonal."""

    vertices: np.ndarray
    values: np.ndarray

    @property
    def order(self) -> int:
        return len(self.vertices)


def jaccard(g: Graph, vi: int, vj: int, k: int = 1) -> float:
    """|N_k[vi] ∩ N_k[vj]| / |N_k[vi] ∪ N_k[vj]|.

    Both neighborhoods contain their own center, so the denominator is
    never zero.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if vi == vj:
        g._check_vertex(vi)
        return 1.0
    a = neighborhood(g, vi, k)
    b = neighborhood(g, vj, k)
    inter = np.intersect1d(a, b, assume_unique=True).size
    return inter / (a.size + b.size - inter)


def _pair_fill(values, hoods_i, hoods_j, rows, cols):
    for ii, a in zip(rows, hoods_i):
        for jj, b in zip(cols, hoods_j):
            if jj <= ii:
                continue
            inter = np.intersect1d(a, b, assume_unique=True).size
            s = inter / (a.size + b.size - inter)
            values[ii, jj] = s
            values[jj, ii] = s


def build_similarity_matrix(g: Graph, selected, k: int = 1, *,
                            max_cached_entries: int = DEFAULT_CACHE_ENTRIES) -> SimilarityMatrix:
    """All pairwise Jaccard values between the selected vertices.

    Neighborhoods are materialized once per vertex and reused across the
    row. If the total materialized size would exceed max_cached_entries,
    rows are processed in blocks and neighborhoods recomputed per block
    pair, trading time for a bounded footprint.
    """
    verts = np.asarray(list(selected) if not isinstance(selected, np.ndarray)
                       else selected, dtype=np.int64)
    if verts.size == 0:
        raise ValueError("selected must be non-empty")
    if np.unique(verts).size != verts.size:
        raise ValueError("selected vertices must be distinct")
    if k < 1:
        raise ValueError("k must be >= 1")
    q = verts.size
    values = np.eye(q)

    sizes = np.array([neighborhood(g, int(v), k).size for v in verts], dtype=np.int64)
    if int(sizes.sum()) <= max_cached_entries:
        blocks = [np.arange(q)]
    else:
        half = max(1, max_cached_entries // 2)
        blocks, start, acc = [], 0, 0
        for i in range(q):
            if acc + sizes[i] > half and i > start:
                blocks.append(np.arange(start, i))
                start, acc = i, 0
            acc += sizes[i]
        blocks.append(np.arange(start, q))

    for bi_idx, bi in enumerate(blocks):
        hoods_i = [neighborhood(g, int(verts[i]), k) for i in bi]
        _pair_fill(values, hoods_i, hoods_i, bi, bi)
        for bj in blocks[bi_idx + 1:]:
            hoods_j = [neighborhood(g, int(verts[j]), k) for j in bj]
            _pair_fill(values, hoods_i, hoods_j, bi, bj)
    return SimilarityMatrix(vertices=verts, values=values)


def write_similarity_csv(s: SimilarityMatrix, path) -> None:
    """Row-major CSV dump; the header row carries the vertex ids."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([int(v) for v in s.vertices])
        for row in s.values:
            w.writerow([repr(float(x)) for x in row])


def read_similarity_csv(path) -> SimilarityMatrix:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"empty similarity file: {path}")
    vertices = np.array([int(v) for v in rows[0]], dtype=np.int64)
    values = np.array([[float(x) for x in row] for row in rows[1:]])
    return SimilarityMatrix(vertices=vertices, values=values)
