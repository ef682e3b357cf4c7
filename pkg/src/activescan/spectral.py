"""Spectral clustering of the similarity matrix and classical MDS.

The clustering variant is fixed: RBF affinity on the distance 1 - S,
symmetric degree normalization, row-normalized top eigenvectors, k-means
with deterministic seeding. The eigengap of the normalized affinity
spectrum suggests the cluster count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .similarity import SimilarityMatrix


@dataclass
class ClusterAssignment:
    vertices: np.ndarray
    labels: np.ndarray
    num_clusters: int


@dataclass
class SpectralDiagnostics:
    eigenvalues: np.ndarray
    chosen_gap_index: int
    kmeans_inertia: float
    restarts_used: int


@dataclass
class MdsResult:
    coords: np.ndarray
    eigenvalues: np.ndarray
    negative_clamped: bool


def _as_matrix(s) -> np.ndarray:
    return s.values if isinstance(s, SimilarityMatrix) else np.asarray(s, dtype=float)


def auto_sigma(values: np.ndarray) -> float:
    """Median heuristic: median off-diagonal distance 1 - S, 1.0 if degenerate."""
    q = values.shape[0]
    if q < 2:
        return 1.0
    off = ~np.eye(q, dtype=bool)
    med = float(np.median(1.0 - values[off]))
    return med if med > 0 else 1.0


def rbf_affinity(s, sigma: float | None = None) -> np.ndarray:
    """W[i,j] = exp(-(1 - S[i,j])^2 / (2 sigma^2)), unit diagonal.

    sigma=None selects the median heuristic over off-diagonal distances.
    """
    values = _as_matrix(s)
    if sigma is None:
        sigma = auto_sigma(values)
    elif sigma <= 0:
        raise ValueError("sigma must be positive")
    dist = 1.0 - values
    w = np.exp(-(dist ** 2) / (2.0 * sigma ** 2))
    np.fill_diagonal(w, 1.0)
    return w


def _normalized_affinity(w: np.ndarray) -> np.ndarray:
    deg = w.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    pos = deg > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(deg[pos])
    sym = w * inv_sqrt[:, None] * inv_sqrt[None, :]
    return (sym + sym.T) / 2.0


def normalized_affinity_spectrum(w: np.ndarray) -> np.ndarray:
    """Eigenvalues of D^{-1/2} W D^{-1/2}, sorted descending."""
    evals = np.linalg.eigvalsh(_normalized_affinity(np.asarray(w, dtype=float)))
    return evals[::-1]


def estimate_num_clusters(eigenvalues, max_clusters: int) -> int:
    """Largest consecutive eigengap position, floored at two clusters.

    Scans gaps lambda_i - lambda_{i+1} for 1-based i in [1, max_clusters);
    ties resolve to the smallest i. A single-cluster answer is vacuous for
    community detection, so the result is floored at 2.
    """
    evals = np.asarray(eigenvalues, dtype=float)
    if evals.size < 2:
        raise ValueError("need at least 2 eigenvalues")
    if not 2 <= max_clusters <= evals.size:
        raise ValueError("max_clusters must be in [2, len(eigenvalues)]")
    gaps = evals[:max_clusters - 1] - evals[1:max_clusters]
    best = int(np.argmax(gaps)) + 1
    return max(best, 2)


def eigengap_floor_applied(eigenvalues, max_clusters: int) -> bool:
    """True when the raw eigengap choice was 1 and the floor of 2 bound."""
    evals = np.asarray(eigenvalues, dtype=float)
    gaps = evals[:max_clusters - 1] - evals[1:max_clusters]
    return int(np.argmax(gaps)) + 1 < 2


def model_selection_affinity(s, k_scale: int = 3) -> np.ndarray:
    """Self-tuned affinity over similarity-row profiles, for cluster counting.

    The eigengap needs coherent groups to show up as near-unit eigenvalues
    of the normalized affinity, which a single global bandwidth cannot
    deliver when group densities differ. This affinity compares vertices by
    the Euclidean distance between their similarity-matrix rows (the
    self-similarity coordinate removed, since it carries no pair
    information) and applies local scaling: each vertex's bandwidth is its
    distance to the k_scale-th nearest neighbor, so every coherent group
    saturates toward affinity one at its own scale.

    Used only to choose the cluster count; the clustering itself embeds the
    RBF affinity of 1 - S.
    """
    profiles = _as_matrix(s).copy()
    np.fill_diagonal(profiles, 0.0)
    sq = (profiles ** 2).sum(axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * profiles @ profiles.T, 0.0)
    dist = np.sqrt(d2)
    q = dist.shape[0]
    order = np.sort(dist, axis=1)
    sigma = order[:, min(k_scale, q - 1)]
    sigma[sigma == 0] = 1.0
    w = np.exp(-d2 / np.outer(sigma, sigma))
    np.fill_diagonal(w, 1.0)
    return w


def _kmeans_once(x: np.ndarray, k: int, rng: np.random.Generator,
                 max_iter: int) -> tuple[np.ndarray, float]:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[c] = x[idx]
        d2 = np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1))

    labels = None
    for _ in range(max_iter):
        dists = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        for c in range(k):
            if not (new_labels == c).any():
                # empty-cluster repair: re-seed at the point farthest from
                # its own centroid and hand that point to the empty cluster
                own = dists[np.arange(n), new_labels]
                p = int(own.argmax())
                centers[c] = x[p]
                new_labels[p] = c
                dists[:, c] = ((x - centers[c]) ** 2).sum(axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = x[labels == c].mean(axis=0)
    dists = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float(dists[np.arange(n), labels].sum())
    return labels, inertia


def _kmeans(x: np.ndarray, k: int, seed: int, restarts: int = 10,
            max_iter: int = 300) -> tuple[np.ndarray, float]:
    children = np.random.SeedSequence(seed).spawn(restarts)
    best_labels, best_inertia = None, np.inf
    for child in children:
        labels, inertia = _kmeans_once(x, k, np.random.default_rng(child), max_iter)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels, best_inertia


def spectral_cluster(w: np.ndarray, num_clusters: int, seed: int,
                     vertices: np.ndarray | None = None,
                     restarts: int = 10) -> tuple[ClusterAssignment, SpectralDiagnostics]:
    """Normalized spectral clustering of a symmetric affinity matrix.

    Embeds each point by the top num_clusters eigenvectors of
    D^{-1/2} W D^{-1/2}, row-normalizes (zero rows left as zero), and runs
    seeded k-means over the embedding. Identical (w, num_clusters, seed)
    always yields an identical assignment.
    """
    w = np.asarray(w, dtype=float)
    q = w.shape[0]
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("affinity matrix must be square")
    if not np.allclose(w, w.T, atol=1e-10):
        raise ValueError("affinity matrix must be symmetric")
    if not 1 <= num_clusters <= q:
        raise ValueError(f"num_clusters must be in [1, {q}]")
    if vertices is None:
        vertices = np.arange(q, dtype=np.int64)

    evals, evecs = np.linalg.eigh(_normalized_affinity(w))
    evals = evals[::-1]
    embed = evecs[:, ::-1][:, :num_clusters].copy()
    norms = np.linalg.norm(embed, axis=1)
    pos = norms > 0
    embed[pos] /= norms[pos, None]

    if num_clusters == 1:
        labels = np.zeros(q, dtype=np.int64)
        inertia = float(((embed - embed.mean(axis=0)) ** 2).sum())
    else:
        labels, inertia = _kmeans(embed, num_clusters, seed, restarts=restarts)
        labels = labels.astype(np.int64)

    assignment = ClusterAssignment(vertices=np.asarray(vertices, dtype=np.int64),
                                   labels=labels, num_clusters=num_clusters)
    diagnostics = SpectralDiagnostics(eigenvalues=evals,
                                      chosen_gap_index=num_clusters,
                                      kmeans_inertia=inertia,
                                      restarts_used=restarts)
    return assignment, diagnostics


def classical_mds(s, dims: int = 2) -> MdsResult:
    """Classical MDS of the distance 1 - S.

    Double-centers the squared distances and embeds with the top `dims`
    eigenpairs; negative eigenvalues among them are clamped to zero and
    flagged.
    """
    values = _as_matrix(s)
    q = values.shape[0]
    if not 1 <= dims <= q:
        raise ValueError(f"dims must be in [1, {q}]")
    dist = 1.0 - values
    j = np.eye(q) - np.ones((q, q)) / q
    b = -0.5 * j @ (dist ** 2) @ j
    evals, evecs = np.linalg.eigh((b + b.T) / 2.0)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    used = evals[:dims]
    clamped = bool((used < 0).any())
    coords = evecs[:, :dims] * np.sqrt(np.clip(used, 0, None))
    return MdsResult(coords=coords, eigenvalues=evals, negative_clamped=clamped)
