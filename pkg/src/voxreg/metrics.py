"""Pose error metrics and the success rule used by the benchmark."""

from __future__ import annotations

import numpy as np

from .geometry import Pose

# Success thresholds, in meters and degrees.
RTE_THRESHOLD_M = 2.0
RRE_THRESHOLD_DEG = 5.0


def rte(t_est, t_gt) -> float:
    """Translation error: Euclidean distance between the two vectors."""
    diff = np.asarray(t_gt, dtype=np.float64) - np.asarray(t_est, dtype=np.float64)
    return float(np.linalg.norm(diff))


def rre(r_est, r_gt) -> float:
    """Rotation error in degrees: the geodesic angle between rotations.

    The trace argument is clamped to [-1, 1] so that rotations computed
    with float noise near 0 or 180 degrees stay in the arccos domain.
    """
    r_est = np.asarray(r_est, dtype=np.float64)
    r_gt = np.asarray(r_gt, dtype=np.float64)
    cos_arg = (np.trace(r_est.T @ r_gt) - 1.0) / 2.0
    return float(np.degrees(abs(np.arccos(np.clip(cos_arg, -1.0, 1.0)))))


def pose_errors(pose_est: Pose, pose_gt: Pose) -> tuple[float, float]:
    return rte(pose_est.t, pose_gt.t), rre(pose_est.R, pose_gt.R)


def is_success(valid: bool, rte_m: float, rre_deg: float) -> bool:
    """Strict thresholds: a registration counts only when valid and both
    errors are strictly below 2 m and 5 degrees."""
    return bool(valid) and rte_m < RTE_THRESHOLD_M and rre_deg < RRE_THRESHOLD_DEG
