"""Local surface descriptors from a single radius search per point.

The extraction runs in two passes over one shared neighbor table:

1. For every point, one radius search at the descriptor radius. The
   normal-estimation neighborhood is carved out of that result set by
   re-checking distances, so the tree is never queried twice for the
   same point. Points with too few neighbors, or whose neighborhood is
   too line-like for a stable normal, are marked invalid.
2. Neighbor lists are restricted to points that survived pass 1, and
   queries left with too few surviving neighbors are dropped.

Each surviving point then gets a histogram signature: three angular
relations between its normal and each neighbor's normal are binned per
neighbor (the per-point histogram), and neighboring histograms are
blended in with inverse-distance weights to form the final descriptor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateNeighborhoodError,
    NoReliablePointsError,
    RegistrationError,
)
from .geometry import PointCloud
from .neighbors import RadiusSearcher, build_index
from .params import Params

F1_RANGE = (-math.pi, math.pi)
F2_RANGE = (-1.0, 1.0)
F3_RANGE = (-1.0, 1.0)


@dataclass(frozen=True)
class NormalEstimate:
    """Unit surface normal plus the linearity of its neighborhood.

    Linearity is (l1 - l2)/l1 from the PCA eigenvalues l1 >= l2 >= l3;
    it approaches 1 on line-like neighborhoods where the normal
    direction is arbitrary.
    """

    normal: np.ndarray
    linearity: float


@dataclass(frozen=True)
class ReliabilityTables:
    """Per-point validity state shared by both extraction passes.

    ``step1_valid`` flags points that passed the cardinality and
    linearity gates. ``query_indices`` lists the points that also kept
    enough valid neighbors afterwards; only those get descriptors.
    ``neighbor_lists`` holds, for every step-1-valid point, its radius
    neighbors restricted to step-1-valid members (self included). The
    lists are frozen here; both histogram passes read the same lists.
    """

    step1_valid: np.ndarray
    query_indices: np.ndarray
    normals: np.ndarray
    neighbor_lists: list[np.ndarray]


@dataclass(frozen=True)
class DescriptorSet:
    """Histogram signatures for the reliable subset of a cloud.

    ``indices[k]`` is the cloud index owning row ``k`` of
    ``descriptors``; ``points`` and ``normals`` are aligned with rows.
    """

    indices: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    descriptors: np.ndarray

    def __len__(self) -> int:
        return self.indices.shape[0]

    def dump_text(self) -> str:
        lines = []
        for idx, row in zip(self.indices, self.descriptors):
            lines.append(str(int(idx)) + " " + " ".join(f"{x:.9g}" for x in row))
        return "\n".join(lines) + ("\n" if lines else "")


def _fix_normal_signs(normals: np.ndarray) -> np.ndarray:
    """Orient normals to nonnegative z, breaking ties toward +x then +y."""
    nx, ny, nz = normals[:, 0], normals[:, 1], normals[:, 2]
    flip = (nz < 0) | ((nz == 0) & ((nx < 0) | ((nx == 0) & (ny < 0))))
    out = normals.copy()
    out[flip] *= -1.0
    return out


def estimate_normal_pca(points) -> NormalEstimate:
    """PCA normal of a neighborhood: eigenvector of the smallest eigenvalue.

    Raises a degenerate-neighborhood error on fewer than 3 points or a
    zero covariance (all points identical).
    """
    if isinstance(points, PointCloud):
        pts = points.points
    else:
        pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise RegistrationError(f"neighborhood must be (M, 3), got {pts.shape}")
    if pts.shape[0] < 3:
        raise DegenerateNeighborhoodError("degenerate neighborhood: fewer than 3 points")
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / pts.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    lam1, lam2 = evals[2], evals[1]
    if lam1 <= 0.0:
        raise DegenerateNeighborhoodError("degenerate neighborhood: zero covariance")
    normal = _fix_normal_signs(evecs[:, 0][None, :])[0]
    linearity = float(min(1.0, max(0.0, (lam1 - lam2) / lam1)))
    return NormalEstimate(normal=normal, linearity=linearity)


def angular_features(p_q, n_q, p_k, n_k) -> tuple[float, float, float]:
    """Three angular relations between two oriented points.

    The endpoint whose normal makes the smaller angle with the
    connecting line (oriented away from that endpoint) anchors the
    local frame; ties go to the first argument. The result is
    independent of argument order.
    """
    pqx, pqy, pqz = (float(c) for c in p_q)
    pkx, pky, pkz = (float(c) for c in p_k)
    dx, dy, dz = pkx - pqx, pky - pqy, pkz - pqz
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dist == 0.0:
        raise RegistrationError("coincident points have no angular features")
    dhx, dhy, dhz = dx / dist, dy / dist, dz / dist
    nqx, nqy, nqz = (float(c) for c in n_q)
    nkx, nky, nkz = (float(c) for c in n_k)
    cos_q = nqx * dhx + nqy * dhy + nqz * dhz
    cos_k = -(nkx * dhx + nky * dhy + nkz * dhz)
    if cos_q >= cos_k:
        ux, uy, uz = nqx, nqy, nqz
        bx, by, bz = nkx, nky, nkz
        ddx, ddy, ddz = dhx, dhy, dhz
    else:
        ux, uy, uz = nkx, nky, nkz
        bx, by, bz = nqx, nqy, nqz
        ddx, ddy, ddz = -dhx, -dhy, -dhz
    vx = ddy * uz - ddz * uy
    vy = ddz * ux - ddx * uz
    vz = ddx * uy - ddy * ux
    wx = uy * vz - uz * vy
    wy = uz * vx - ux * vz
    wz = ux * vy - uy * vx
    f1 = math.atan2(wx * bx + wy * by + wz * bz, ux * bx + uy * by + uz * bz)
    f2 = vx * bx + vy * by + vz * bz
    f3 = ux * ddx + uy * ddy + uz * ddz
    return f1, f2, f3


def bin_index(f: float, feature: int, bins: int) -> int:
    """1-based histogram bin of angular feature ``feature`` in {1, 2, 3}.

    Values outside the feature's nominal range (float noise) are
    clamped, so the result always lands in [1, bins].
    """
    if feature == 1:
        fmin, fmax = F1_RANGE
    elif feature in (2, 3):
        fmin, fmax = F2_RANGE
    else:
        raise RegistrationError(f"feature index must be 1, 2, or 3, got {feature}")
    f = min(max(float(f), fmin), fmax)
    eps = 1e-9 * (fmax - fmin)
    return int(math.floor(bins * (f - fmin) / (fmax + eps - fmin))) + 1


def _bin_array(f: np.ndarray, fmin: float, fmax: float, bins: int) -> np.ndarray:
    f = np.clip(f, fmin, fmax)
    eps = 1e-9 * (fmax - fmin)
    return np.floor(bins * (f - fmin) / (fmax + eps - fmin)).astype(np.int64) + 1


def _pair_features_array(pq, nq, pk, nk):
    """Vectorized counterpart of :func:`angular_features` over pair rows."""
    dx = pk[:, 0] - pq[:, 0]
    dy = pk[:, 1] - pq[:, 1]
    dz = pk[:, 2] - pq[:, 2]
    dist = np.sqrt(dx * dx + dy * dy + dz * dz)
    dhx, dhy, dhz = dx / dist, dy / dist, dz / dist
    cos_q = nq[:, 0] * dhx + nq[:, 1] * dhy + nq[:, 2] * dhz
    cos_k = -(nk[:, 0] * dhx + nk[:, 1] * dhy + nk[:, 2] * dhz)
    a_is_q = cos_q >= cos_k
    ux = np.where(a_is_q, nq[:, 0], nk[:, 0])
    uy = np.where(a_is_q, nq[:, 1], nk[:, 1])
    uz = np.where(a_is_q, nq[:, 2], nk[:, 2])
    bx = np.where(a_is_q, nk[:, 0], nq[:, 0])
    by = np.where(a_is_q, nk[:, 1], nq[:, 1])
    bz = np.where(a_is_q, nk[:, 2], nq[:, 2])
    ddx = np.where(a_is_q, dhx, -dhx)
    ddy = np.where(a_is_q, dhy, -dhy)
    ddz = np.where(a_is_q, dhz, -dhz)
    vx = ddy * uz - ddz * uy
    vy = ddz * ux - ddx * uz
    vz = ddx * uy - ddy * ux
    wx = uy * vz - uz * vy
    wy = uz * vx - ux * vz
    wz = ux * vy - uy * vx
    f1 = np.arctan2(wx * bx + wy * by + wz * bz, ux * bx + uy * by + uz * bz)
    f2 = vx * bx + vy * by + vz * bz
    f3 = ux * ddx + uy * ddy + uz * ddz
    return f1, f2, f3


def estimate_reliable_normals(
    cloud: PointCloud, index: RadiusSearcher, params: Params
) -> ReliabilityTables:
    """Run both validity passes and estimate normals for reliable points.

    Issues exactly one radius search per cloud point. An all-invalid
    cloud is not an error here; it simply yields an empty query set.
    """
    n = len(cloud)
    pts = cloud.points
    neigh = index.radius_neighbors_batch(pts, params.r_fpfh)

    step1 = np.zeros(n, dtype=bool)
    normals = np.zeros((n, 3))
    r_n2 = params.r_normal * params.r_normal
    cand_q = []
    cand_blocks = []
    for q in range(n):
        members = neigh[q]
        if members.size < params.tau_num:
            continue
        diff = pts[members] - pts[q]
        sq = np.einsum("ij,ij->i", diff, diff)
        near = members[sq < r_n2]
        if near.size < params.tau_num:
            continue
        cand_q.append(q)
        cand_blocks.append(near)

    if cand_q:
        qs = np.array(cand_q, dtype=np.int64)
        lengths = np.array([b.size for b in cand_blocks], dtype=np.int64)
        starts = np.zeros(lengths.size, dtype=np.int64)
        np.cumsum(lengths[:-1], out=starts[1:])
        cat = np.concatenate(cand_blocks)
        # Shift each neighborhood by its query point before accumulating
        # moments: keeps the covariance arithmetic well-conditioned far
        # from the origin.
        local = pts[cat] - np.repeat(pts[qs], lengths, axis=0)
        sums = np.add.reduceat(local, starts, axis=0)
        means = sums / lengths[:, None]
        outer = local[:, :, None] * local[:, None, :]
        second = np.add.reduceat(outer.reshape(-1, 9), starts, axis=0)
        cov = second.reshape(-1, 3, 3) / lengths[:, None, None]
        cov -= means[:, :, None] * means[:, None, :]
        evals, evecs = np.linalg.eigh(cov)
        lam1, lam2 = evals[:, 2], evals[:, 1]
        ok = lam1 > 0.0
        safe = np.where(ok, lam1, 1.0)
        linearity = np.clip((lam1 - lam2) / safe, 0.0, 1.0)
        accept = ok & (linearity < params.tau_lin)
        fixed = _fix_normal_signs(evecs[:, :, 0])
        keep = qs[accept]
        step1[keep] = True
        normals[keep] = fixed[accept]

    neighbor_lists: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * n
    final = []
    for q in range(n):
        if not step1[q]:
            continue
        members = neigh[q]
        restricted = members[step1[members]]
        neighbor_lists[q] = restricted
        if restricted.size >= params.tau_num:
            final.append(q)

    return ReliabilityTables(
        step1_valid=step1,
        query_indices=np.array(final, dtype=np.int64),
        normals=normals,
        neighbor_lists=neighbor_lists,
    )


def compute_spfh(
    q: int, tables: ReliabilityTables, cloud: PointCloud, bins: int
) -> np.ndarray:
    """Per-point histogram of ``q``: bin counts over its valid neighbors.

    Entries are scaled by 100 / neighbor count, so each of the three
    feature blocks sums to 100 whenever the point has any non-self
    neighbor. A point whose only valid neighbor is itself gets zeros.
    """
    members = tables.neighbor_lists[q]
    others = members[members != q]
    out = np.zeros(3 * bins)
    if others.size == 0:
        return out
    pts = cloud.points
    scale = 100.0 / others.size
    for k in others:
        f1, f2, f3 = angular_features(pts[q], tables.normals[q], pts[k], tables.normals[k])
        out[bin_index(f1, 1, bins) - 1] += scale
        out[bins + bin_index(f2, 2, bins) - 1] += scale
        out[2 * bins + bin_index(f3, 3, bins) - 1] += scale
    return out


def compute_fpfh(
    q: int,
    spfh_by_index: dict,
    tables: ReliabilityTables,
    cloud: PointCloud,
) -> np.ndarray:
    """Blend the per-point histograms of ``q`` and its valid neighbors.

    Neighbor histograms are weighted by inverse distance and averaged;
    the distances are positive because a voxelized cloud holds no
    duplicate points.
    """
    members = tables.neighbor_lists[q]
    others = members[members != q]
    out = spfh_by_index[q].copy()
    if others.size == 0:
        return out
    pts = cloud.points
    acc = np.zeros_like(out)
    for k in others:
        omega = float(np.linalg.norm(pts[q] - pts[k]))
        acc += spfh_by_index[int(k)] / omega
    return out + acc / others.size


def _spfh_bulk(
    cloud: PointCloud, tables: ReliabilityTables, bins: int
) -> tuple[np.ndarray, np.ndarray]:
    """Histograms for every step-1-valid point, vectorized over all pairs.

    Returns (spfh matrix, slot map) where slot map sends a cloud index
    to its row, or -1 for invalid points.
    """
    valid_idx = np.flatnonzero(tables.step1_valid)
    vcount = valid_idx.size
    slot = np.full(len(cloud), -1, dtype=np.int64)
    slot[valid_idx] = np.arange(vcount)

    blocks = []
    counts = np.zeros(vcount, dtype=np.int64)
    for row, q in enumerate(valid_idx):
        members = tables.neighbor_lists[q]
        others = members[members != q]
        counts[row] = others.size
        if others.size:
            blocks.append(others)
    width = 3 * bins
    spfh = np.zeros((vcount, width))
    if not blocks:
        return spfh, slot

    i_cat = np.concatenate(blocks)
    q_rep = np.repeat(valid_idx, counts)
    rows = np.repeat(np.arange(vcount), counts)
    pts = cloud.points
    nrm = tables.normals
    f1, f2, f3 = _pair_features_array(pts[q_rep], nrm[q_rep], pts[i_cat], nrm[i_cat])
    b1 = _bin_array(f1, *F1_RANGE, bins)
    b2 = _bin_array(f2, *F2_RANGE, bins)
    b3 = _bin_array(f3, *F3_RANGE, bins)
    flat = np.concatenate(
        [rows * width + (b1 - 1), rows * width + bins + (b2 - 1), rows * width + 2 * bins + (b3 - 1)]
    )
    hist = np.bincount(flat, minlength=vcount * width).astype(np.float64)
    spfh = hist.reshape(vcount, width)
    scale = np.zeros(vcount)
    nz = counts > 0
    scale[nz] = 100.0 / counts[nz]
    spfh *= scale[:, None]
    return spfh, slot


def _fpfh_bulk(
    cloud: PointCloud,
    tables: ReliabilityTables,
    spfh: np.ndarray,
    slot: np.ndarray,
) -> np.ndarray:
    queries = tables.query_indices
    blocks = [tables.neighbor_lists[q][tables.neighbor_lists[q] != q] for q in queries]
    lengths = np.array([b.size for b in blocks], dtype=np.int64)
    starts = np.zeros(lengths.size, dtype=np.int64)
    np.cumsum(lengths[:-1], out=starts[1:])
    k_cat = np.concatenate(blocks)
    q_rep = np.repeat(queries, lengths)
    pts = cloud.points
    diff = pts[q_rep] - pts[k_cat]
    omega = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    contrib = spfh[slot[k_cat]] / omega[:, None]
    acc = np.add.reduceat(contrib, starts, axis=0)
    return spfh[slot[queries]] + acc / lengths[:, None]


def extract_with_tables(
    cloud: PointCloud, params: Params, index: RadiusSearcher | None = None
) -> tuple[DescriptorSet, ReliabilityTables, np.ndarray]:
    """Full extraction, also returning the validity tables and raw histograms.

    Exposed for inspection and testing; most callers want extract().
    """
    if index is None:
        index = build_index(cloud)
    tables = estimate_reliable_normals(cloud, index, params)
    if tables.query_indices.size == 0:
        raise NoReliablePointsError("no reliable points")
    spfh, slot = _spfh_bulk(cloud, tables, params.histogram_bins)
    descriptors = _fpfh_bulk(cloud, tables, spfh, slot)
    queries = tables.query_indices
    dset = DescriptorSet(
        indices=queries,
        points=cloud.points[queries],
        normals=tables.normals[queries],
        descriptors=descriptors,
    )
    return dset, tables, spfh


def extract(
    cloud: PointCloud, params: Params, index: RadiusSearcher | None = None
) -> DescriptorSet:
    """Descriptors for the reliable points of a voxelized cloud.

    Issues exactly one radius search per point; raises when no point
    survives the reliability gates.
    """
    dset, _, _ = extract_with_tables(cloud, params, index)
    return dset
