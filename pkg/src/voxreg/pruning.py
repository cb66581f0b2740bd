"""Correspondence pruning via a length-consistency graph.

Two correspondences arising from one rigid motion must preserve the
distance between their source points when measured between their
target points, up to twice the noise bound. Pairs passing that test
become edges of a compatibility graph; correspondences that fail to
sit in the graph's densest core are discarded as outliers.

The densest core is the maximum k-core: the subgraph left standing at
the last non-empty level of degree peeling. Peeling runs in
O(vertices + edges) with bucketed degrees, which is what makes this
usable where a maximum-clique search would not be.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import RegistrationError
from .geometry import PointCloud
from .matching import CorrespondenceSet

_PAIR_CHUNK = 256


@dataclass(frozen=True)
class CompatGraph:
    """Undirected simple graph over correspondences, stored row-compressed.

    ``row_offsets[u]:row_offsets[u+1]`` slices ``col_indices`` into the
    ascending neighbor list of vertex ``u``; every edge appears in both
    directions and never as a self-loop.
    """

    row_offsets: np.ndarray
    col_indices: np.ndarray

    def __post_init__(self):
        offs = np.asarray(self.row_offsets, dtype=np.int64)
        cols = np.asarray(self.col_indices, dtype=np.int64)
        if offs.ndim != 1 or offs.size < 1 or offs[0] != 0:
            raise RegistrationError("row offsets must start at 0")
        if np.any(np.diff(offs) < 0) or offs[-1] != cols.size:
            raise RegistrationError("row offsets must be nondecreasing and span all columns")
        offs.flags.writeable = False
        cols.flags.writeable = False
        object.__setattr__(self, "row_offsets", offs)
        object.__setattr__(self, "col_indices", cols)

    @property
    def vertex_count(self) -> int:
        return self.row_offsets.size - 1

    @property
    def edge_count(self) -> int:
        return self.col_indices.size // 2

    def neighbors(self, u: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[u] : self.row_offsets[u + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def edge_list(self) -> np.ndarray:
        """Edges as (E, 2) rows with u < w, sorted lexicographically."""
        u = np.repeat(np.arange(self.vertex_count, dtype=np.int64), self.degrees())
        w = self.col_indices
        keep = u < w
        return np.column_stack([u[keep], w[keep]])


def from_edge_list(n_vertices: int, edges) -> CompatGraph:
    """CSR graph from unique undirected edges (self-loops rejected)."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= n_vertices):
        raise RegistrationError("edge endpoint out of range")
    if np.any(e[:, 0] == e[:, 1]):
        raise RegistrationError("self-loops are not allowed")
    both_u = np.concatenate([e[:, 0], e[:, 1]])
    both_w = np.concatenate([e[:, 1], e[:, 0]])
    order = np.lexsort((both_w, both_u))
    both_u = both_u[order]
    both_w = both_w[order]
    counts = np.bincount(both_u, minlength=n_vertices)
    offsets = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return CompatGraph(row_offsets=offsets, col_indices=both_w)


def compatibility_test(
    c, c_prime, src: PointCloud, tgt: PointCloud, beta: float
) -> bool:
    """Length-consistency check for one pair of correspondences.

    True iff the target-side segment length differs from the
    source-side length by at most 2*beta (inclusive).
    """
    if beta <= 0.0:
        raise RegistrationError("beta must be positive")
    a0 = src.points[c.src_index]
    a1 = src.points[c_prime.src_index]
    b0 = tgt.points[c.tgt_index]
    b1 = tgt.points[c_prime.tgt_index]
    da = float(np.linalg.norm(a0 - a1))
    db = float(np.linalg.norm(b0 - b1))
    return abs(db - da) <= 2.0 * beta


def build_compat_graph(
    corrs: CorrespondenceSet, src: PointCloud, tgt: PointCloud, beta: float
) -> CompatGraph:
    """Graph over all correspondence pairs passing the consistency test.

    Exact enumeration of all K(K-1)/2 pairs, chunked to bound memory.
    """
    if beta <= 0.0:
        raise RegistrationError("beta must be positive")
    k = len(corrs)
    if k == 0:
        raise RegistrationError("cannot build a graph over zero correspondences")
    a = src.points[corrs.src_indices]
    b = tgt.points[corrs.tgt_indices]
    bound = 2.0 * beta
    us = []
    ws = []
    for lo in range(0, k, _PAIR_CHUNK):
        hi = min(lo + _PAIR_CHUNK, k)
        da = cdist(a[lo:hi], a)
        db = cdist(b[lo:hi], b)
        ok = np.abs(db - da) <= bound
        rows, cols = np.nonzero(ok)
        rows = rows + lo
        upper = cols > rows
        us.append(rows[upper])
        ws.append(cols[upper])
    edges = np.column_stack([np.concatenate(us), np.concatenate(ws)])
    return from_edge_list(k, edges)


def core_numbers(graph: CompatGraph) -> np.ndarray:
    """Core number of every vertex by batched degree peeling.

    Peels in waves: at level k every remaining vertex of degree <= k is
    removed in one vectorized step and its neighbors' degrees are
    decremented with a bincount, then the wave repeats on the vertices
    whose degree just fell. Each adjacency row is scanned exactly once
    over the whole run, so total gather work is linear in the edge
    count; the per-level rescans add O(levels * vertices).
    """
    n = graph.vertex_count
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    offs = graph.row_offsets
    cols = graph.col_indices
    deg = np.diff(offs).astype(np.int64)
    core = np.zeros(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    remaining = n
    k = 0
    while remaining > 0:
        wave = np.flatnonzero(alive & (deg <= k))
        if wave.size == 0:
            k += 1
            continue
        while wave.size:
            core[wave] = k
            alive[wave] = False
            remaining -= wave.size
            starts = offs[wave]
            lengths = offs[wave + 1] - starts
            total = int(lengths.sum())
            if total == 0:
                break
            base = np.repeat(starts - np.concatenate(
                ([0], np.cumsum(lengths)[:-1])), lengths)
            nbrs = cols[np.arange(total, dtype=np.int64) + base]
            nbrs = nbrs[alive[nbrs]]
            if nbrs.size == 0:
                break
            deg -= np.bincount(nbrs, minlength=n)
            touched = np.unique(nbrs)
            wave = touched[deg[touched] <= k]
        k += 1
    return core


def max_kcore(graph: CompatGraph) -> np.ndarray:
    """Vertices of the core at the highest non-trivial peeling level.

    Returns ascending vertex indices with core number equal to the
    graph's degeneracy. An edgeless graph has degeneracy 0 and yields
    an empty result: with no consistency support at all, everything is
    pruned rather than everything kept.
    """
    cores = core_numbers(graph)
    if cores.size == 0:
        return np.zeros(0, dtype=np.int64)
    k_star = int(cores.max())
    if k_star == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(cores == k_star).astype(np.int64)


def prune(
    corrs: CorrespondenceSet, src: PointCloud, tgt: PointCloud, beta: float
) -> CorrespondenceSet:
    """Keep only correspondences inside the densest consistency core.

    The result can be empty (nothing mutually consistent); callers
    treat that as registration failure.
    """
    if len(corrs) == 0:
        return corrs
    graph = build_compat_graph(corrs, src, tgt, beta)
    survivors = max_kcore(graph)
    return corrs.subset(survivors)


def dump_graph(graph: CompatGraph, cores: np.ndarray | None = None) -> str:
    """Edge list as text: ``u w`` per line, plus the edge's core level.

    The core level of an edge is the smaller core number of its two
    endpoints. Omitted when ``cores`` is not given.
    """
    lines = []
    for u, w in graph.edge_list():
        if cores is None:
            lines.append(f"{u} {w}")
        else:
            lines.append(f"{u} {w} {min(int(cores[u]), int(cores[w]))}")
    return "\n".join(lines) + ("\n" if lines else "")
