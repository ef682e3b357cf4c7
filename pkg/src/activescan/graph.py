"""Directed simple-graph container with sorted CSR adjacency."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

# Binary layout (documented bit-exactly in README.md):
#   u64 n, u64 m, u64 out_offsets[n+1], u64 out_targets[m], all little-endian.
_BIN_DTYPE = np.dtype("<u8")


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _clean_edges(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Drop self-loops and duplicate directed edges; sort by (src, dst).

    Returns (src, dst, n_self_loops, n_duplicates).
    """
    keep = src != dst
    n_loops = int(src.size - keep.sum())
    src, dst = src[keep], dst[keep]
    if src.size == 0:
        return src, dst, n_loops, 0
    n = int(max(src.max(), dst.max())) + 1
    key = src.astype(np.int64) * n + dst.astype(np.int64)
    uniq = np.unique(key)
    n_dups = int(key.size - uniq.size)
    return uniq // n, uniq % n, n_loops, n_dups


def _csr(n: int, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """CSR offsets/targets from edge rows already sorted by (row, col)."""
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
    return offsets, cols.astype(np.int64, copy=False)


class Graph:
    """Immutable directed graph without self-loops or duplicate edges.

    Vertices are dense integers in [0, n). Out-, in-, and undirected
    adjacency are stored CSR-style with strictly increasing neighbor lists,
    so membership tests and intersections can be merge-based. Instances are
    safe to share between any number of concurrent readers.
    """

    __slots__ = ("n", "m", "_out_off", "_out_dst", "_in_off", "_in_src",
                 "_und_off", "_und_dst", "_deg")

    def __init__(self, n, out_off, out_dst, in_off, in_src, und_off, und_dst):
        self.n = int(n)
        self.m = int(out_dst.size)
        self._out_off = out_off
        self._out_dst = out_dst
        self._in_off = in_off
        self._in_src = in_src
        self._und_off = und_off
        self._und_dst = und_dst
        self._deg = (np.diff(out_off) + np.diff(in_off)).astype(np.int64)

    @classmethod
    def from_edges(cls, n: int, src, dst) -> "Graph":
        """Build a graph on n vertices from directed edge arrays.

        Self-loops and duplicate edges are silently dropped; use
        load_edge_list for counted warnings on external input.
        """
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have equal length")
        if src.size and (src.min() < 0 or dst.min() < 0
                         or src.max() >= n or dst.max() >= n):
            raise ValueError(f"edge endpoint out of range for n={n}")
        src, dst, _, _ = _clean_edges(src, dst)
        out_off, out_dst = _csr(n, src, dst)
        order = np.lexsort((src, dst))
        in_off, in_src = _csr(n, dst[order], src[order])
        # undirected neighbor lists: unique union of both orientations
        a = np.concatenate([src, dst])
        b = np.concatenate([dst, src])
        key = np.unique(a * np.int64(n) + b) if a.size else a
        und_off, und_dst = _csr(n, key // n, key % n)
        return cls(n, out_off, out_dst, in_off, in_src, und_off, und_dst)

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range [0, {self.n})")

    def out_neighbors(self, v: int) -> np.ndarray:
        """Sorted out-neighbors of v (zero-copy view)."""
        return self._out_dst[self._out_off[v]:self._out_off[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        """Sorted in-neighbors of v (zero-copy view)."""
        return self._in_src[self._in_off[v]:self._in_off[v + 1]]

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted distinct undirected neighbors of v; excludes v itself."""
        return self._und_dst[self._und_off[v]:self._und_off[v + 1]]

    def degrees(self) -> np.ndarray:
        """Per-vertex in-degree + out-degree (read-only view)."""
        return self._deg

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """All directed edges as (src, dst), sorted by (src, dst)."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self._out_off))
        return src, self._out_dst.copy()

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.m == other.m
                and np.array_equal(self._out_off, other._out_off)
                and np.array_equal(self._out_dst, other._out_dst))

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def degree_stat(g: Graph, v: int) -> int:
    """In-degree plus out-degree of v; a reciprocal pair counts twice."""
    g._check_vertex(v)
    return int(g._deg[v])


def neighborhood(g: Graph, v: int, k: int) -> np.ndarray:
    """Closed k-th order neighborhood of v on the undirected view.

    Breadth-first expansion ignoring edge orientation; always contains v.
    Returned sorted.
    """
    g._check_vertex(v)
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return np.array([v], dtype=np.int64)
    if k == 1:
        nb = g.neighbors(v)
        return np.insert(nb, np.searchsorted(nb, v), v)
    visited = np.zeros(g.n, dtype=bool)
    visited[v] = True
    frontier = np.array([v], dtype=np.int64)
    layers = [frontier]
    for _ in range(k):
        if frontier.size == 0:
            break
        nxt = np.unique(np.concatenate([g.neighbors(int(u)) for u in frontier]))
        nxt = nxt[~visited[nxt]]
        visited[nxt] = True
        layers.append(nxt)
        frontier = nxt
    return np.sort(np.concatenate(layers))


def induced_edge_count(g: Graph, s) -> int:
    """Number of directed edges with both endpoints in s.

    Scans the incident-edge lists of the members and tests both endpoints
    for membership; every inside edge is seen from both of its endpoints,
    so halving the tally is exact.
    """
    s = np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.int64)
    if s.size == 0:
        return 0
    s = np.unique(s)  # set semantics even if the caller passed repeats
    mask = np.zeros(g.n, dtype=bool)
    mask[s] = True
    total = 0
    for u in s:
        total += int(mask[g.out_neighbors(u)].sum())
        total += int(mask[g.in_neighbors(u)].sum())
    return total // 2


def _iter_lines(source):
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from fh
    else:
        yield from source


def load_edge_list(source, *, with_mapping: bool = False):
    """Parse a plain-text edge list into a Graph.

    Each non-comment line is "src dst" with arbitrary whitespace; lines
    starting with '#' and blank lines are skipped. Vertex ids may be any
    non-negative integers and are remapped to dense [0, n); the mapping
    (dense id -> original id) is returned when with_mapping is set.
    Self-loops and duplicate edges are dropped with a counted warning.
    """
    srcs: list[int] = []
    dsts: list[int] = []
    for line_no, raw in enumerate(_iter_lines(source), 1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(f"expected 'src dst', got {line!r}", line_no)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(f"non-integer token in {line!r}", line_no) from None
        if a < 0 or b < 0:
            raise EdgeListParseError(f"negative vertex id in {line!r}", line_no)
        srcs.append(a)
        dsts.append(b)
    if not srcs:
        raise ValueError("empty edge list")
    raw_src = np.array(srcs, dtype=np.int64)
    raw_dst = np.array(dsts, dtype=np.int64)
    ids, inverse = np.unique(np.concatenate([raw_src, raw_dst]), return_inverse=True)
    src = inverse[:raw_src.size]
    dst = inverse[raw_src.size:]
    n = ids.size
    clean_src, clean_dst, n_loops, n_dups = _clean_edges(src, dst)
    if n_loops:
        log.warning("dropped %d self-loop(s)", n_loops)
    if n_dups:
        log.warning("dropped %d duplicate edge(s)", n_dups)
    g = Graph.from_edges(n, clean_src, clean_dst)
    if with_mapping:
        return g, ids
    return g


def write_edge_list(g: Graph, sink) -> None:
    """Write the canonical edge list (dense ids, sorted by (src, dst))."""
    src, dst = g.edge_arrays()
    lines = "".join(f"{a} {b}\n" for a, b in zip(src.tolist(), dst.tolist()))
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(lines)
    else:
        sink.write(lines)


def write_binary(g: Graph, path) -> None:
    """Write the binary graph format (see module header for the layout)."""
    with open(path, "wb") as fh:
        np.array([g.n, g.m], dtype=_BIN_DTYPE).tofile(fh)
        g._out_off.astype(_BIN_DTYPE).tofile(fh)
        g._out_dst.astype(_BIN_DTYPE).tofile(fh)


def read_binary(path) -> Graph:
    """Read a graph written by write_binary."""
    buf = np.fromfile(path, dtype=_BIN_DTYPE)
    if buf.size < 2:
        raise ValueError("truncated binary graph file")
    n, m = int(buf[0]), int(buf[1])
    if buf.size != 2 + (n + 1) + m:
        raise ValueError("binary graph file has inconsistent sizes")
    offsets = buf[2:2 + n + 1].astype(np.int64)
    targets = buf[2 + n + 1:].astype(np.int64)
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(offsets))
    return Graph.from_edges(n, src, targets)
