"""Top-Q search for the order-1 locality statistic with bound-based pruning.

The search computes the exact statistic on as few vertices as possible:
candidates are visited in degree-descending order, a cheap quadratic bound
is checked first, the tighter capped bound second, and the expensive exact
scan runs only while a bound stays at or above the running threshold.
Pruning is strict-less (a bound equal to the threshold is never pruned), so
ties at the Q-th position are always discovered.
"""

from __future__ import annotations

import csv
import json
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph
from .locality import VertexMarker, _local_stat_value, est_lstat1, est_lstat2

DEFAULT_CHUNK_SIZE = 1024


@dataclass
class TrimState:
    """Running state of a top-Q search.

    curr_max is the largest exact statistic discovered so far (monotone
    non-decreasing); known maps vertex -> exact statistic; pending holds the
    not-yet-computed vertices in degree-descending order.
    """

    curr_max: int = 0
    known: dict[int, int] = field(default_factory=dict)
    pending: list[int] = field(default_factory=list)

    def qth_value(self, q: int) -> int:
        if len(self.known) < q:
            return 0
        vals = np.fromiter(self.known.values(), dtype=np.int64, count=len(self.known))
        return int(np.partition(vals, vals.size - q)[vals.size - q])


@dataclass
class TopQResult:
    """Outcome of a top-Q search.

    entries is sorted by value descending (ascending vertex id within ties)
    and includes every discovered tie at the Q-th value, so its length is
    >= Q. The counters report distinct vertices whose exact statistic /
    bounds were evaluated.
    """

    entries: list[tuple[int, int]]
    computed_count: int
    est1_count: int
    est2_count: int
    wall_ms: float = 0.0
    worker_exact_counts: list[int] | None = None

    def values(self) -> list[int]:
        return [v for _, v in self.entries]


class _Bounds:
    """Lazy per-vertex caches for both upper bounds.

    A slot of -1 means not yet evaluated; evaluation counts are derived
    from the caches afterwards, so concurrent duplicate evaluations (which
    write the same value) cannot skew them.
    """

    __slots__ = ("g", "_b1", "_b2")

    def __init__(self, g: Graph):
        self.g = g
        self._b1 = np.full(g.n, -1, dtype=np.int64)
        self._b2 = np.full(g.n, -1, dtype=np.int64)

    def bound1(self, v: int) -> int:
        val = self._b1[v]
        if val < 0:
            val = est_lstat1(self.g, v)
            self._b1[v] = val
        return int(val)

    def bound2(self, v: int) -> int:
        val = self._b2[v]
        if val < 0:
            val = est_lstat2(self.g, v)
            self._b2[v] = val
        return int(val)

    def counts(self) -> tuple[int, int]:
        return int((self._b1 >= 0).sum()), int((self._b2 >= 0).sum())


def _degree_desc_order(g: Graph, vertices: np.ndarray) -> np.ndarray:
    # ties broken by ascending vertex id for reproducibility
    return vertices[np.lexsort((vertices, -g.degrees()[vertices]))]


def _scan(g, ordered, floor, bounds, marker, trace):
    """One pruning pass over `ordered` (degree-descending candidates).

    The running threshold starts at `floor` and rises with every exact
    value found. Stopping once bound1 drops below the threshold is exact:
    bound1 is monotone in degree, the candidates are degree-sorted, and the
    threshold never decreases.
    """
    curr_max = floor
    computed: dict[int, int] = {}
    for i, v in enumerate(ordered):
        b1 = bounds.bound1(v)
        if b1 < curr_max:
            if trace is not None:
                for u in ordered[i:]:
                    trace[u] = ("est1", curr_max)
            break
        b2 = bounds.bound2(v)
        if b2 < curr_max:
            if trace is not None:
                trace[v] = ("est2", curr_max)
            continue
        val = _local_stat_value(g, v, marker)
        computed[v] = val
        if trace is not None:
            trace.pop(v, None)
        if val > curr_max:
            curr_max = val
    return computed


def top_lstat(g: Graph, candidates, floor: int = 0) -> dict[int, int]:
    """Scan candidates for the largest order-1 statistic above `floor`.

    Returns every vertex whose exact statistic was computed along the way,
    with its value. The maximum over the returned values equals the true
    maximum over the candidates whenever that maximum reaches `floor`;
    vertices whose upper bound fell below the running threshold are skipped.
    """
    cand = np.fromiter(candidates, dtype=np.int64) \
        if not isinstance(candidates, np.ndarray) else candidates.astype(np.int64)
    if cand.size == 0:
        raise ValueError("candidates must be non-empty")
    if cand.min() < 0 or cand.max() >= g.n:
        raise ValueError("candidate vertex out of range")
    if floor < 0:
        raise ValueError("floor must be non-negative")
    ordered = _degree_desc_order(g, cand).tolist()
    return _scan(g, ordered, floor, _Bounds(g), VertexMarker(g.n), None)


def _make_entries(known: dict[int, int], q: int) -> list[tuple[int, int]]:
    items = sorted(known.items(), key=lambda kv: (-kv[1], kv[0]))
    boundary = items[q - 1][1]
    end = q
    while end < len(items) and items[end][1] == boundary:
        end += 1
    return items[:end]


def _search(g, q, scan_pass, trace=None):
    """Two-stage driver shared by the serial and parallel searches.

    Stage 1 accumulates at least Q exact values by repeated scans with a
    zero floor. Stage 2 rescans the remaining vertices with the floor set
    to the current Q-th value and stops once a pass discovers no value
    above its floor: in that pass the threshold never rose past the floor,
    so every still-pending vertex has a bound strictly below the final
    Q-th value.
    """
    if not 1 <= q <= g.n:
        raise ValueError(f"Q must be in [1, {g.n}], got {q}")
    state = TrimState()
    state.pending = _degree_desc_order(g, np.arange(g.n, dtype=np.int64)).tolist()

    def absorb(computed):
        state.known.update(computed)
        state.pending = [u for u in state.pending if u not in computed]
        if computed:
            state.curr_max = max(state.curr_max, max(computed.values()))

    while len(state.known) < q and state.pending:
        computed = scan_pass(state.pending, 0)
        absorb(computed)
        if not computed:
            break  # unreachable with floor 0; guards against a stalled loop
    while state.pending:
        kth = state.qth_value(q)
        computed = scan_pass(state.pending, kth)
        absorb(computed)
        if not computed or max(computed.values()) <= kth:
            break
    return state


def topQ_lstat(g: Graph, q: int, *, _trace: dict | None = None,
               _state_out: list | None = None) -> TopQResult:
    """Exact values of the Q largest order-1 locality statistics.

    The value multiset of the first Q entries equals the brute-force top-Q;
    all boundary ties are included beyond position Q.
    """
    t0 = time.perf_counter()
    bounds = _Bounds(g)
    marker = VertexMarker(g.n)

    def scan_pass(pending, floor):
        return _scan(g, pending, floor, bounds, marker, _trace)

    state = _search(g, q, scan_pass, _trace)
    if _state_out is not None:
        _state_out.append(state)
    e1, e2 = bounds.counts()
    return TopQResult(
        entries=_make_entries(state.known, q),
        computed_count=len(state.known),
        est1_count=e1,
        est2_count=e2,
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )


class _MaxCell:
    """Shared monotone maximum.

    Readers take the value without locking (a stale read only causes extra
    exact computations, never wrong results); writers re-check under the
    lock after an unsynchronized pre-check.
    """

    __slots__ = ("value", "_lock")

    def __init__(self, value: int):
        self.value = value
        self._lock = threading.Lock()

    def offer(self, val: int) -> None:
        if val > self.value:
            with self._lock:
                if val > self.value:
                    self.value = val


class _ChunkJob:
    """Exact computation of one heavy vertex, split over neighborhood parts."""

    __slots__ = ("v", "n1", "remaining", "partial", "lock")

    def __init__(self, v: int, n1: np.ndarray, parts: int):
        self.v = v
        self.n1 = n1
        self.remaining = parts
        self.partial = 0
        self.lock = threading.Lock()

    def add(self, count: int) -> int | None:
        """Fold one part in; returns the final statistic on the last part."""
        with self.lock:
            self.partial += count
            self.remaining -= 1
            if self.remaining == 0:
                return self.partial // 2
        return None


def _chunk_count(g: Graph, n1: np.ndarray, members: np.ndarray) -> int:
    """Incident-edge endpoints of `members` lying in the sorted set n1."""
    chunks = []
    for u in members.tolist():
        chunks.append(g.out_neighbors(u))
        chunks.append(g.in_neighbors(u))
    idx = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    if idx.size == 0:
        return 0
    pos = np.searchsorted(n1, idx)
    pos[pos >= n1.size] = n1.size - 1
    return int((n1[pos] == idx).sum())


def _parallel_scan(g, pending, floor, bounds, workers, chunk_size,
                   exact_counts):
    """One pruning pass executed by a pool of work-stealing workers.

    Vertices are dealt round-robin so each worker's local queue stays
    degree-descending; an idle worker steals from the tail of another
    queue. Vertices whose neighborhood exceeds chunk_size are subdivided
    into part-tasks that are themselves stealable.
    """
    queues = [deque(pending[w::workers]) for w in range(workers)]
    cell = _MaxCell(floor)
    results: list[dict[int, int]] = [{} for _ in range(workers)]
    errors: list[BaseException] = []
    flight = {"count": 0}
    flight_lock = threading.Lock()

    def take(w):
        try:
            return queues[w].popleft()
        except IndexError:
            pass
        for off in range(1, workers):
            try:
                return queues[(w + off) % workers].pop()
            except IndexError:
                continue
        return None

    def run_vertex(w, v, marker):
        if bounds.bound1(v) < cell.value:
            return
        if bounds.bound2(v) < cell.value:
            return
        nb = g.neighbors(v)
        if nb.size + 1 <= chunk_size:
            val = _local_stat_value(g, v, marker)
            results[w][v] = val
            exact_counts[w] += 1
            cell.offer(val)
            return
        n1 = np.insert(nb, np.searchsorted(nb, v), v)
        parts = range(0, n1.size, chunk_size)
        job = _ChunkJob(v, n1, len(parts))
        for lo in parts:
            queues[w].append((job, lo, min(lo + chunk_size, n1.size)))

    def run_chunk(w, job, lo, hi):
        final = job.add(_chunk_count(g, job.n1, job.n1[lo:hi]))
        if final is not None:
            results[w][job.v] = final
            exact_counts[w] += 1
            cell.offer(final)

    def worker(w):
        marker = VertexMarker(g.n)
        while True:
            if errors:
                return
            task = take(w)
            if task is None:
                with flight_lock:
                    if flight["count"] == 0 and all(not qd for qd in queues):
                        return
                time.sleep(0)
                continue
            with flight_lock:
                flight["count"] += 1
            try:
                if isinstance(task, tuple):
                    run_chunk(w, *task)
                else:
                    run_vertex(w, task, marker)
            except BaseException as exc:
                errors.append(exc)
                return
            finally:
                with flight_lock:
                    flight["count"] -= 1

    threads = [threading.Thread(target=worker, args=(w,)) for w in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    merged: dict[int, int] = {}
    for r in results:
        merged.update(r)
    return merged


def topQ_lstat_parallel(g: Graph, q: int, workers: int = 1, *,
                        chunk_size: int = DEFAULT_CHUNK_SIZE) -> TopQResult:
    """Parallel top-Q search; the value multiset matches topQ_lstat exactly.

    computed_count may differ between runs: workers read the shared running
    maximum without synchronization, and a stale read only means the exact
    statistic is computed on slightly more vertices.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1:
        return topQ_lstat(g, q)
    t0 = time.perf_counter()
    bounds = _Bounds(g)
    exact_counts = [0] * workers

    def scan_pass(pending, floor):
        return _parallel_scan(g, pending, floor, bounds, workers, chunk_size,
                              exact_counts)

    state = _search(g, q, scan_pass)
    e1, e2 = bounds.counts()
    return TopQResult(
        entries=_make_entries(state.known, q),
        computed_count=len(state.known),
        est1_count=e1,
        est2_count=e2,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        worker_exact_counts=exact_counts,
    )


def write_trim_report(result: TopQResult, q: int, path, fmt: str = "json") -> None:
    """Persist a trim report as JSON (one object) or CSV (metadata repeated)."""
    path = Path(path)
    if fmt == "json":
        payload = {
            "q": q,
            "computed_count": result.computed_count,
            "est1_count": result.est1_count,
            "est2_count": result.est2_count,
            "wall_ms": result.wall_ms,
            "entries": [[int(v), int(val)] for v, val in result.entries],
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["q", "vertex", "psi1", "computed_count",
                        "est1_count", "est2_count", "wall_ms"])
            for v, val in result.entries:
                w.writerow([q, v, val, result.computed_count,
                            result.est1_count, result.est2_count,
                            f"{result.wall_ms:.3f}"])
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_trim_report(path) -> tuple[int, TopQResult]:
    """Read a report written by write_trim_report; returns (q, result)."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        result = TopQResult(
            entries=[(int(v), int(val)) for v, val in obj["entries"]],
            computed_count=obj["computed_count"],
            est1_count=obj["est1_count"],
            est2_count=obj["est2_count"],
            wall_ms=obj["wall_ms"],
        )
        return int(obj["q"]), result
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"empty trim report: {path}")
    first = rows[0]
    result = TopQResult(
        entries=[(int(r["vertex"]), int(r["psi1"])) for r in rows],
        computed_count=int(first["computed_count"]),
        est1_count=int(first["est1_count"]),
        est2_count=int(first["est2_count"]),
        wall_ms=float(first["wall_ms"]),
    )
    return int(first["q"]), result
