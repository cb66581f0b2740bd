"""Cloud preprocessing: voxel-grid downsampling and plane suppression."""

from __future__ import annotations

import numpy as np

from .errors import RegistrationError
from .geometry import PointCloud

# A candidate dominant plane is only suppressed when its normal is close
# to vertical; anything steeper is likely structure worth keeping.
_MAX_PLANE_TILT_DEG = 30.0
_PLANE_TRIALS = 200


def voxel_downsample(cloud: PointCloud, v: float) -> PointCloud:
    """Keep the first point falling into each cell of a grid of pitch ``v``.

    Cell membership is keyed on ``floor(p / v)`` per axis. Output points
    keep their relative input order, so the operation is deterministic
    and idempotent: every survivor already occupies a distinct cell.
    """
    if v <= 0.0:
        raise RegistrationError("voxel size must be positive")
    if len(cloud) == 0:
        return cloud
    keys = np.floor(cloud.points / v).astype(np.int64)
    # np.unique returns the smallest index per key; sorting those indices
    # restores input order among the survivors.
    _, first = np.unique(keys, axis=0, return_index=True)
    keep = np.sort(first)
    return cloud.subset(keep)


def geometric_suppression(
    cloud: PointCloud,
    enable: bool,
    plane_dist_thresh: float,
    min_plane_fraction: float = 0.2,
    seed: int = 0,
) -> tuple[PointCloud, np.ndarray]:
    """Remove the largest near-horizontal plane, if one dominates the cloud.

    A dense repeated structure such as a ground plane produces many
    near-identical descriptors and floods the matcher with outliers, so
    it can pay to strip it before extraction. Runs a fixed number of
    random 3-point plane hypotheses and keeps the one with the most
    points within ``plane_dist_thresh``. The plane is removed only when
    it holds at least ``min_plane_fraction`` of the cloud and its normal
    is within 30 degrees of vertical. Returns the remaining cloud and
    the indices (into the input) that were kept.

    The consensus search is seeded, so results are reproducible. When
    ``enable`` is false the cloud passes through untouched.
    """
    n = len(cloud)
    all_idx = np.arange(n, dtype=np.int64)
    if not enable or n < 3:
        return cloud, all_idx

    pts = cloud.points
    rng = np.random.default_rng(seed)
    best_count = -1
    best_normal = None
    best_offset = 0.0
    for _ in range(_PLANE_TRIALS):
        i, j, k = rng.choice(n, size=3, replace=False)
        normal = np.cross(pts[j] - pts[i], pts[k] - pts[i])
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            continue
        normal = normal / norm
        offset = normal @ pts[i]
        count = int(np.count_nonzero(np.abs(pts @ normal - offset) <= plane_dist_thresh))
        if count > best_count:
            best_count = count
            best_normal = normal
            best_offset = offset

    if best_normal is None or best_count < min_plane_fraction * n:
        return cloud, all_idx
    tilt = np.degrees(np.arccos(min(1.0, abs(best_normal[2]))))
    if tilt > _MAX_PLANE_TILT_DEG:
        return cloud, all_idx

    keep = all_idx[np.abs(pts @ best_normal - best_offset) > plane_dist_thresh]
    if keep.size == 0:
        # Degenerate input (a single plane); removing everything would
        # leave nothing to register, so leave the cloud untouched.
        return cloud, all_idx
    return cloud.subset(keep), keep
