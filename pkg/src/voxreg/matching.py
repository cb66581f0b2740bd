"""Descriptor matching: mutual nearest neighbors and ratio filtering.

A pair (i, j) survives only if j is i's nearest target descriptor and
i is j's nearest source descriptor, under Euclidean distance in the
full descriptor space. Small problems use a direct double scan; large
ones shortlist candidates with a k-d tree, then re-rank the shortlist
with the exact same distance arithmetic, so both paths return
identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import MatchingError
from .features import DescriptorSet

# Above this many descriptors on either side, the O(n*m) scan is
# replaced by the tree-assisted path.
_BRUTE_LIMIT = 2000


@dataclass(frozen=True)
class Correspondence:
    """One matched pair: cloud indices plus matching-quality distances.

    ``d1`` is the descriptor distance of the match, ``d2`` the distance
    to the runner-up target, and ``ratio`` = d1/d2 (0 when d1 is 0 or
    no runner-up exists). Low ratios mark distinctive matches.
    """

    src_index: int
    tgt_index: int
    d1: float
    d2: float
    ratio: float


@dataclass(frozen=True)
class CorrespondenceSet:
    """Column-wise store of matched pairs, ordered by source index."""

    src_indices: np.ndarray
    tgt_indices: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    ratio: np.ndarray

    def __len__(self) -> int:
        return self.src_indices.shape[0]

    def __getitem__(self, k: int) -> Correspondence:
        return Correspondence(
            src_index=int(self.src_indices[k]),
            tgt_index=int(self.tgt_indices[k]),
            d1=float(self.d1[k]),
            d2=float(self.d2[k]),
            ratio=float(self.ratio[k]),
        )

    def subset(self, positions) -> CorrespondenceSet:
        pos = np.asarray(positions, dtype=np.int64)
        return CorrespondenceSet(
            src_indices=self.src_indices[pos],
            tgt_indices=self.tgt_indices[pos],
            d1=self.d1[pos],
            d2=self.d2[pos],
            ratio=self.ratio[pos],
        )

    def dump_text(self) -> str:
        lines = [
            f"{int(i)} {int(j)} {a:.9g} {b:.9g} {r:.9g}"
            for i, j, a, b, r in zip(self.src_indices, self.tgt_indices, self.d1, self.d2, self.ratio)
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def from_index_pairs(src_indices, tgt_indices) -> CorrespondenceSet:
    """Build a correspondence set from bare index pairs.

    Distance fields are zeroed; useful when pairs come from an external
    labeling rather than descriptor matching.
    """
    si = np.asarray(src_indices, dtype=np.int64)
    ti = np.asarray(tgt_indices, dtype=np.int64)
    if si.shape != ti.shape:
        raise MatchingError("index arrays must have equal length")
    zeros = np.zeros(si.shape[0])
    return CorrespondenceSet(si, ti, zeros.copy(), zeros.copy(), zeros.copy())


def _nn_brute(queries: np.ndarray, targets: np.ndarray):
    """Exact nearest and second-nearest squared distances by direct scan."""
    n = queries.shape[0]
    m = targets.shape[0]
    nn = np.empty(n, dtype=np.int64)
    d1sq = np.empty(n)
    d2sq = np.empty(n)
    for i in range(n):
        sq = ((targets - queries[i]) ** 2).sum(axis=1)
        j = int(np.argmin(sq))
        nn[i] = j
        d1sq[i] = sq[j]
        d2sq[i] = np.partition(sq, 1)[1] if m >= 2 else np.inf
    return nn, d1sq, d2sq


def _nn_tree(queries: np.ndarray, targets: np.ndarray):
    """Tree-shortlisted exact nearest neighbors.

    The tree bounds the radius that must contain the two nearest
    targets; every shortlisted candidate is then re-scored with the
    same expression the direct scan uses, so ties and distances come
    out identical to :func:`_nn_brute`.
    """
    m = targets.shape[0]
    if m < 2:
        return _nn_brute(queries, targets)
    tree = cKDTree(targets)
    dists, _ = tree.query(queries, k=2)
    radii = dists[:, 1] * (1.0 + 1e-9)
    shortlists = tree.query_ball_point(queries, radii)
    n = queries.shape[0]
    nn = np.empty(n, dtype=np.int64)
    d1sq = np.empty(n)
    d2sq = np.empty(n)
    for i in range(n):
        cand = np.asarray(shortlists[i], dtype=np.int64)
        cand.sort()
        sq = ((targets[cand] - queries[i]) ** 2).sum(axis=1)
        j = int(np.argmin(sq))
        nn[i] = cand[j]
        d1sq[i] = sq[j]
        d2sq[i] = np.partition(sq, 1)[1]
    return nn, d1sq, d2sq


def mutual_match(src: DescriptorSet, tgt: DescriptorSet) -> CorrespondenceSet:
    """Reciprocal nearest-neighbor pairs between two descriptor sets.

    Exact matching with smallest-index tie-breaks; each source and each
    target index appears at most once. The runner-up distance feeding
    the ratio is taken on the target side.
    """
    if len(src) == 0 or len(tgt) == 0:
        raise MatchingError("empty descriptor set")
    s = src.descriptors
    t = tgt.descriptors
    find = _nn_brute if max(s.shape[0], t.shape[0]) <= _BRUTE_LIMIT else _nn_tree
    nn_st, d1sq, d2sq = find(s, t)
    nn_ts, _, _ = find(t, s)

    rows = np.flatnonzero(nn_ts[nn_st] == np.arange(s.shape[0]))
    cols = nn_st[rows]
    d1 = np.sqrt(d1sq[rows])
    d2 = np.sqrt(d2sq[rows])
    with np.errstate(invalid="ignore"):
        ratio = np.where(d1 == 0.0, 0.0, d1 / d2)
    ratio = np.where(np.isfinite(ratio), ratio, 0.0)
    return CorrespondenceSet(
        src_indices=src.indices[rows].astype(np.int64),
        tgt_indices=tgt.indices[cols].astype(np.int64),
        d1=d1,
        d2=d2,
        ratio=ratio,
    )


def ratio_filter(corrs: CorrespondenceSet, n_tau: int) -> CorrespondenceSet:
    """Keep the ``n_tau`` most distinctive pairs (smallest ratio).

    Ties break lexicographically on (source, target) index; survivors
    keep their original relative order.
    """
    if len(corrs) <= n_tau:
        return corrs
    order = np.lexsort((corrs.tgt_indices, corrs.src_indices, corrs.ratio))
    keep = np.sort(order[:n_tau])
    return corrs.subset(keep)
