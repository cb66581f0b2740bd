"""Robust SE(3) estimation from putative correspondences.

The estimator alternates two cheap steps under a graduated schedule:
fit a pose by weighted closed-form alignment, then refresh per-pair
weights with a truncated-quadratic rule whose sharpness is controlled
by an annealing parameter mu. Early on the rule is soft and nearly
every pair contributes; as mu grows it hardens into accept/reject at
the noise bound, leaving gross outliers with zero weight. The final
pose is only trusted when enough pairs survive with high weight.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    InsufficientSupportError,
    RankDeficientError,
    SolverDegenerateError,
)
from .geometry import Pose, pose_to_json_dict
from .params import GncSettings

_MU_MIN = 1e-6
_INLIER_WEIGHT = 0.5


@dataclass(frozen=True)
class StageRecord:
    """One pipeline stage: its name, output cardinality, wall time."""

    stage: str
    count: int
    ms: float


@dataclass(frozen=True)
class RegistrationResult:
    """Estimated pose plus the evidence behind it.

    ``inlier_indices`` are positions (into the solver's input pairs) of
    weights above 0.5. ``valid`` means the count reached the configured
    minimum; consumers must treat invalid poses as meaningless.
    """

    pose: Pose
    inlier_indices: np.ndarray
    weights: np.ndarray
    valid: bool
    iterations: int
    stage_trace: tuple[StageRecord, ...] = field(default=())
    failure_reason: str | None = None

    @property
    def num_inliers(self) -> int:
        return int(self.inlier_indices.shape[0])

    def with_trace(
        self, trace: list[StageRecord], failure_reason: str | None
    ) -> RegistrationResult:
        return replace(self, stage_trace=tuple(trace), failure_reason=failure_reason)

    def canonical_dict(self) -> dict:
        """Deterministic serialization: pose, inliers, validity.

        Excludes timings on purpose; two runs over identical inputs
        must serialize identically.
        """
        return {
            "pose": pose_to_json_dict(self.pose),
            "inlier_indices": [int(i) for i in self.inlier_indices],
            "valid": bool(self.valid),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True)

    def report_dict(self) -> dict:
        """Full serialization including the timed stage trace."""
        return {
            "pose": self.pose.matrix().tolist(),
            "num_inliers": self.num_inliers,
            "valid": bool(self.valid),
            "failure_reason": self.failure_reason,
            "stage_trace": [
                {"stage": s.stage, "count": s.count, "ms": s.ms} for s in self.stage_trace
            ],
        }


def weighted_procrustes(src_pts, tgt_pts, weights) -> Pose:
    """Pose minimizing the weighted squared alignment error, in closed form.

    Weighted centroids are removed, the 3x3 cross-covariance is
    decomposed by SVD, and the determinant of the candidate rotation is
    corrected so a reflection can never be returned.
    """
    a = np.asarray(src_pts, dtype=np.float64).reshape(-1, 3)
    b = np.asarray(tgt_pts, dtype=np.float64).reshape(-1, 3)
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if a.shape != b.shape or a.shape[0] != w.shape[0]:
        raise InsufficientSupportError("insufficient support: mismatched pair arrays")
    positive = w > 0.0
    if int(np.count_nonzero(positive)) < 3:
        raise InsufficientSupportError("insufficient support: fewer than 3 weighted pairs")
    a = a[positive]
    b = b[positive]
    w = w[positive]
    wsum = float(w.sum())
    a_bar = (w[:, None] * a).sum(axis=0) / wsum
    b_bar = (w[:, None] * b).sum(axis=0) / wsum
    a0 = a - a_bar
    b0 = b - b_bar
    cross = (w[:, None] * a0).T @ b0
    u, s, vt = np.linalg.svd(cross)
    if s[0] <= 0.0 or s[1] <= 1e-9 * s[0]:
        raise RankDeficientError("rank-deficient: weighted pairs are collinear")
    v = vt.T
    d = np.sign(np.linalg.det(v @ u.T))
    rot = v @ np.diag([1.0, 1.0, d]) @ u.T
    return Pose(rot, b_bar - rot @ a_bar)


def tls_weights(residuals_sq, mu: float, noise_bound: float) -> np.ndarray:
    """Closed-form weight update for the annealed truncated loss.

    Pairs well inside the noise bound get weight 1, pairs far outside
    get 0, and the band between shrinks as mu grows.
    """
    r2 = np.asarray(residuals_sq, dtype=np.float64)
    nb2 = noise_bound * noise_bound
    lower = mu / (mu + 1.0) * nb2
    upper = (mu + 1.0) / mu * nb2
    w = np.zeros_like(r2)
    w[r2 <= lower] = 1.0
    mid = (r2 > lower) & (r2 < upper)
    if np.any(mid):
        r = np.sqrt(r2[mid])
        w[mid] = noise_bound * np.sqrt(mu * (mu + 1.0)) / r - mu
    return np.clip(w, 0.0, 1.0)


def tls_surrogate_cost(residuals_sq, weights, mu: float, noise_bound: float) -> float:
    """Joint annealed-loss value for a given pose (residuals) and weights.

    At fixed mu, alternating the weight update and the weighted refit
    can never increase this quantity; tests rely on that.
    """
    r2 = np.asarray(residuals_sq, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    nb2 = noise_bound * noise_bound
    penalty = mu * (1.0 - w) / (mu + w) * nb2
    return float(np.sum(w * r2 + penalty))


def _residuals_sq(pose: Pose, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = b - pose.apply(a)
    return np.einsum("ij,ij->i", diff, diff)


def gnc_solve(
    src_pts,
    tgt_pts,
    settings: GncSettings,
    min_inliers: int = 5,
) -> RegistrationResult:
    """Robust pose from matched point pairs via graduated annealing.

    Starts from an unweighted fit, then alternates weight updates and
    weighted refits while mu grows geometrically. Stops when weights
    settle, the surrogate cost stalls, or the iteration cap is hit.
    Degenerate support during any refit raises a solver error; loss of
    consensus shows up as ``valid=False`` instead.
    """
    a = np.asarray(src_pts, dtype=np.float64).reshape(-1, 3)
    b = np.asarray(tgt_pts, dtype=np.float64).reshape(-1, 3)
    if a.shape != b.shape:
        raise SolverDegenerateError("solver degenerate: mismatched pair arrays")
    n = a.shape[0]
    if n < 3:
        raise SolverDegenerateError("solver degenerate: fewer than 3 pairs")

    weights = np.ones(n)
    try:
        pose = weighted_procrustes(a, b, weights)
    except (InsufficientSupportError, RankDeficientError) as exc:
        raise SolverDegenerateError(f"solver degenerate: {exc}") from exc
    r2 = _residuals_sq(pose, a, b)

    nb2 = settings.noise_bound * settings.noise_bound
    denom = 2.0 * float(r2.max()) - nb2
    mu = nb2 / denom if denom > 0.0 else _MU_MIN
    mu = max(mu, _MU_MIN)

    iterations = 0
    prev_cost = None
    for _ in range(settings.max_iterations):
        iterations += 1
        new_weights = tls_weights(r2, mu, settings.noise_bound)
        change = float(np.max(np.abs(new_weights - weights)))
        weights = new_weights
        try:
            pose = weighted_procrustes(a, b, weights)
        except (InsufficientSupportError, RankDeficientError) as exc:
            raise SolverDegenerateError(f"solver degenerate: {exc}") from exc
        r2 = _residuals_sq(pose, a, b)
        cost = tls_surrogate_cost(r2, weights, mu, settings.noise_bound)
        if change < settings.weight_tolerance:
            break
        if prev_cost is not None and abs(prev_cost - cost) < settings.cost_tolerance:
            break
        prev_cost = cost
        mu *= settings.mu_update

    inliers = np.flatnonzero(weights > _INLIER_WEIGHT).astype(np.int64)
    return RegistrationResult(
        pose=pose,
        inlier_indices=inliers,
        weights=weights,
        valid=inliers.size >= min_inliers,
        iterations=iterations,
    )


def validate(result: RegistrationResult, tau_valid: int) -> bool:
    """Consensus gate: enough final inliers to trust the pose."""
    return result.num_inliers >= tau_valid
