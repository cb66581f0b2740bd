"""Synthetic indoor-style scenes with exact ground truth.

Clouds are sampled from surfaces (a floor, two walls, and a handful of
boxes) rather than uniform noise, so neighborhood PCA produces
meaningful normals and descriptors have structure to latch onto. The
boxes are randomly oriented: a scene whose every surface is axis
aligned looks the same to an axis-canonicalized normal under many
distinct rotations, which makes large-rotation ground truth ambiguous
at descriptor level.

Alongside the clouds, the generator can emit labeled correspondence
pairs at an exact outlier ratio for exercising the pruning and solver
stages in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RegistrationError
from .geometry import PointCloud, Pose, rotation_from_axis_angle

# Fraction of structured points per surface family. Boxes carry most of
# the mass: large bare planes look identical everywhere at descriptor
# level, and matches between them are wrong yet mutually consistent, so
# plane-heavy scenes starve the matcher of usable structure.
_FLOOR_FRAC = 0.25
_WALL_FRAC = 0.2
_N_BOXES = 6
# Surface roughness relative to extent; keeps neighborhoods non-singular.
_JITTER_FRAC = 0.001


@dataclass(frozen=True)
class LabeledPairs:
    """Correspondence pairs with ground-truth inlier labels.

    Indices reference the source and target clouds of the scene; every
    source index and every target index appears at most once.
    """

    src_indices: np.ndarray
    tgt_indices: np.ndarray
    is_inlier: np.ndarray

    def __len__(self) -> int:
        return self.src_indices.shape[0]


def random_pose(rng: np.random.Generator, max_angle_deg: float, max_translation: float) -> Pose:
    axis = rng.normal(size=3)
    while np.linalg.norm(axis) < 1e-12:
        axis = rng.normal(size=3)
    angle = np.radians(rng.uniform(0.0, max_angle_deg))
    rot = rotation_from_axis_angle(axis, angle)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    return Pose(rot, direction * rng.uniform(0.0, max_translation))


def _sample_rect(rng, n, origin, edge_a, edge_b):
    u = rng.uniform(size=(n, 1))
    v = rng.uniform(size=(n, 1))
    return origin + u * edge_a + v * edge_b


def _sample_box_faces(rng, n, center, half_sizes, rotation):
    """Points on the surface of an oriented box, uniform by face area."""
    hx, hy, hz = half_sizes
    areas = np.array([hy * hz, hy * hz, hx * hz, hx * hz, hx * hy, hx * hy])
    face = rng.choice(6, size=n, p=areas / areas.sum())
    local = rng.uniform(-1.0, 1.0, size=(n, 3)) * half_sizes
    axis = face // 2
    sign = np.where(face % 2 == 0, 1.0, -1.0)
    local[np.arange(n), axis] = sign * half_sizes[axis]
    return center + local @ rotation.T


def _structured_points(rng: np.random.Generator, n_points: int, extent: float) -> np.ndarray:
    n_floor = int(round(_FLOOR_FRAC * n_points))
    n_walls = int(round(_WALL_FRAC * n_points))
    n_boxes = n_points - n_floor - n_walls

    ex = np.array([extent, 0.0, 0.0])
    ey = np.array([0.0, extent, 0.0])
    wall_h = np.array([0.0, 0.0, 0.4 * extent])
    parts = [
        _sample_rect(rng, n_floor, np.zeros(3), ex, ey),
        _sample_rect(rng, n_walls - n_walls // 2, np.zeros(3), ex, wall_h),
        _sample_rect(rng, n_walls // 2, np.zeros(3), ey, wall_h),
    ]

    per_box = np.full(_N_BOXES, n_boxes // _N_BOXES)
    per_box[: n_boxes % _N_BOXES] += 1
    for count in per_box:
        center = rng.uniform(0.15, 0.85, size=3) * extent
        center[2] = rng.uniform(0.05, 0.35) * extent
        half = rng.uniform(0.04, 0.12, size=3) * extent
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        rotation = rotation_from_axis_angle(axis, rng.uniform(0.0, np.pi))
        parts.append(_sample_box_faces(rng, int(count), center, half, rotation))

    pts = np.concatenate(parts, axis=0)
    pts += rng.normal(scale=_JITTER_FRAC * extent, size=pts.shape)
    return pts


def generate_scene(
    seed: int,
    n_points: int,
    extent: float,
    pose_gt: Pose,
    noise_sigma: float,
    outlier_corr_ratio: float,
    n_pairs: int = 200,
    clutter_ratio: float = 0.0,
) -> tuple[PointCloud, PointCloud, LabeledPairs]:
    """Deterministic scene pair plus labeled correspondences.

    The target is the posed source with per-point Gaussian noise; an
    optional clutter fraction adds unmatched points to each side, after
    the labeled block, so labels stay index-stable. Exactly
    ``round(outlier_corr_ratio * n_pairs)`` pairs are labeled outliers
    and rewired away from their true partners.
    """
    if n_points < 10:
        raise RegistrationError("scene needs at least 10 points")
    if not (0.0 <= outlier_corr_ratio <= 1.0):
        raise RegistrationError("outlier ratio must lie in [0, 1]")
    if n_pairs > n_points:
        raise RegistrationError("cannot label more pairs than points")
    rng = np.random.default_rng(seed)

    src_core = _structured_points(rng, n_points, extent)
    tgt_core = pose_gt.apply(src_core)
    if noise_sigma > 0.0:
        tgt_core = tgt_core + rng.normal(scale=noise_sigma, size=tgt_core.shape)

    n_clutter = int(round(clutter_ratio * n_points))
    src_pts, tgt_pts = src_core, tgt_core
    if n_clutter:
        src_lo = src_core.min(axis=0)
        src_hi = src_core.max(axis=0)
        tgt_lo = tgt_core.min(axis=0)
        tgt_hi = tgt_core.max(axis=0)
        src_pts = np.concatenate(
            [src_core, rng.uniform(src_lo, src_hi, size=(n_clutter, 3))], axis=0
        )
        tgt_pts = np.concatenate(
            [tgt_core, rng.uniform(tgt_lo, tgt_hi, size=(n_clutter, 3))], axis=0
        )

    pair_src = rng.choice(n_points, size=n_pairs, replace=False).astype(np.int64)
    pair_tgt = pair_src.copy()
    is_inlier = np.ones(n_pairs, dtype=bool)
    n_out = int(round(outlier_corr_ratio * n_pairs))
    if n_out:
        out_pos = rng.choice(n_pairs, size=n_out, replace=False)
        is_inlier[out_pos] = False
        margin = 0.05 * extent
        truth = pose_gt.apply(src_core[pair_src[out_pos]])
        if n_out == 1:
            pool = np.setdiff1d(np.arange(n_points, dtype=np.int64), pair_tgt)
            far = pool[np.linalg.norm(tgt_core[pool] - truth[0], axis=1) > margin]
            if far.size == 0:
                raise RegistrationError("could not construct a well-separated outlier pair")
            pair_tgt[out_pos] = rng.choice(far)
        else:
            # Rewire outliers among themselves (keeps target indices
            # unique), then swap-repair any that landed too close to
            # their true partner.
            shuffled = pair_tgt[out_pos].copy()
            rng.shuffle(shuffled)
            for _ in range(1000):
                bad = np.flatnonzero(
                    np.linalg.norm(tgt_core[shuffled] - truth, axis=1) <= margin
                )
                if bad.size == 0:
                    break
                for pos in bad:
                    other = int(rng.integers(n_out))
                    shuffled[pos], shuffled[other] = shuffled[other], shuffled[pos]
            else:
                raise RegistrationError("could not construct well-separated outlier pairs")
            pair_tgt[out_pos] = shuffled

    labels = LabeledPairs(src_indices=pair_src, tgt_indices=pair_tgt, is_inlier=is_inlier)
    return PointCloud(src_pts), PointCloud(tgt_pts), labels
