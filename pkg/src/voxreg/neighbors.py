"""Fixed-radius neighbor search over a point cloud.

The search uses a k-d tree but exposes an open-ball contract: a point
``p`` is a neighbor of query ``q`` iff ``||p - q|| < r`` (strictly).
The query point itself always satisfies this, so self-neighbors are
included. The tree library treats the radius as a closed ball, so raw
candidates are re-filtered on squared distance before being returned.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyCloudError
from .geometry import PointCloud


class RadiusSearcher:
    """Reusable open-ball radius search over one cloud.

    ``query_count`` tracks how many single-point queries have been
    issued, which lets callers assert that a consumer touched the tree
    the expected number of times (one search per point, not two).
    """

    def __init__(self, cloud: PointCloud):
        if len(cloud) == 0:
            raise EmptyCloudError("cannot build a neighbor index over an empty cloud")
        self._points = cloud.points
        self._tree = cKDTree(self._points)
        self.query_count = 0

    def __len__(self) -> int:
        return self._points.shape[0]

    def radius_neighbors(self, center: np.ndarray, radius: float) -> np.ndarray:
        """Indices of points with ``||p - center|| < radius``, ascending."""
        self.query_count += 1
        center = np.asarray(center, dtype=np.float64)
        raw = self._tree.query_ball_point(center, radius)
        idx = np.asarray(raw, dtype=np.int64)
        if idx.size == 0:
            return idx
        diff = self._points[idx] - center
        sq = np.einsum("ij,ij->i", diff, diff)
        idx = idx[sq < radius * radius]
        idx.sort()
        return idx

    def radius_neighbors_batch(self, centers: np.ndarray, radius: float) -> list[np.ndarray]:
        """Open-ball neighbors for a stack of query points.

        Counts one query per row of ``centers``, exactly as if each had
        been issued through :meth:`radius_neighbors`.
        """
        centers = np.asarray(centers, dtype=np.float64)
        self.query_count += centers.shape[0]
        raw = self._tree.query_ball_point(centers, radius)
        r2 = radius * radius
        out = []
        for center, cand in zip(centers, raw):
            idx = np.asarray(cand, dtype=np.int64)
            if idx.size:
                diff = self._points[idx] - center
                sq = np.einsum("ij,ij->i", diff, diff)
                idx = idx[sq < r2]
                idx.sort()
            out.append(idx)
        return out


def build_index(cloud: PointCloud) -> RadiusSearcher:
    """Build a reusable exact radius-search index over ``cloud``."""
    return RadiusSearcher(cloud)


def radius_search(index: RadiusSearcher, query: np.ndarray, radius: float) -> np.ndarray:
    """Ascending indices of cloud points strictly within ``radius`` of ``query``."""
    return index.radius_neighbors(query, radius)
