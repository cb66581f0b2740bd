"""Core geometric types: 3D point clouds and rigid SE(3) transforms.

All types are immutable after construction (backing arrays are marked
read-only), so they can be shared freely across concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RegistrationError

# Construction accepts file-derived rotations with float32-level noise;
# anything drifting past this internally is re-projected onto SO(3).
_CONSTRUCT_TOL = 1e-6
_INTERNAL_TOL = 1e-9


def _frozen_f64(values, shape_hint: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise RegistrationError(f"{shape_hint} contains NaN or Inf")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation matrix ``R`` in SO(3) and translation ``t``.

    Applying the pose maps a point ``p`` to ``R @ p + t``.
    """

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        R = _frozen_f64(self.R, "rotation")
        t = _frozen_f64(self.t, "translation")
        if R.shape != (3, 3):
            raise RegistrationError(f"rotation must be 3x3, got {R.shape}")
        if t.shape != (3,):
            raise RegistrationError(f"translation must be a 3-vector, got {t.shape}")
        drift = np.linalg.norm(R.T @ R - np.eye(3))
        det_err = abs(np.linalg.det(R) - 1.0)
        if drift > _CONSTRUCT_TOL or det_err > _CONSTRUCT_TOL:
            raise RegistrationError(
                f"matrix is not a rotation (orthonormality drift {drift:.3g}, "
                f"det error {det_err:.3g})"
            )
        if drift > _INTERNAL_TOL or det_err > _INTERNAL_TOL:
            R = _project_to_so3(R)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one point (3,) or a stack of points (N, 3)."""
        return np.asarray(points, dtype=np.float64) @ self.R.T + self.t

    def inverse(self) -> Pose:
        return Pose(self.R.T, -self.R.T @ self.t)

    def compose(self, other: Pose) -> Pose:
        """Return the pose equivalent to applying ``other`` then ``self``."""
        return Pose(self.R @ other.R, self.R @ other.t + self.t)

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        m = np.eye(4)
        m[:3, :3] = self.R
        m[:3, 3] = self.t
        return m


def _project_to_so3(R: np.ndarray) -> np.ndarray:
    U, _, Vt = np.linalg.svd(R)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    out = U @ D @ Vt
    out.flags.writeable = False
    return out


def se3_apply(pose: Pose, point: np.ndarray) -> np.ndarray:
    """Apply a pose to a single point."""
    return pose.apply(point)


def se3_inverse(pose: Pose) -> Pose:
    return pose.inverse()


def pose_to_text(pose: Pose) -> str:
    """Row-major 4x4 homogeneous matrix as 16 whitespace-separated numbers."""
    return " ".join(repr(float(x)) for x in pose.matrix().ravel())


def pose_from_text(text: str) -> Pose:
    values = text.split()
    if len(values) != 16:
        raise RegistrationError(f"pose text must hold 16 numbers, got {len(values)}")
    try:
        m = np.array([float(x) for x in values]).reshape(4, 4)
    except ValueError as exc:
        raise RegistrationError(f"pose text is not numeric: {exc}") from exc
    if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=1e-6):
        raise RegistrationError("pose text bottom row must be 0 0 0 1")
    return Pose(m[:3, :3], m[:3, 3])


def pose_to_json_dict(pose: Pose) -> dict:
    return {"R": pose.R.tolist(), "t": pose.t.tolist()}


def pose_from_json_dict(obj: dict) -> Pose:
    try:
        return Pose(np.array(obj["R"]), np.array(obj["t"]))
    except (KeyError, TypeError) as exc:
        raise RegistrationError(f"pose JSON must hold 'R' and 't': {exc}") from exc


def pose_to_quaternion(pose: Pose) -> np.ndarray:
    """Unit quaternion (w, x, y, z) equivalent of the rotation part."""
    R = pose.R
    trace = R[0, 0] + R[1, 1] + R[2, 2]
    if trace > 0.0:
        s = 2.0 * np.sqrt(trace + 1.0)
        q = np.array(
            [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
        )
    else:
        i = int(np.argmax([R[0, 0], R[1, 1], R[2, 2]]))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = 2.0 * np.sqrt(max(0.0, 1.0 + R[i, i] - R[j, j] - R[k, k]))
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    return q / np.linalg.norm(q)


def rotation_from_axis_angle(axis, angle_rad: float) -> np.ndarray:
    """Rotation matrix about ``axis`` by ``angle_rad`` (Rodrigues form)."""
    a = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        raise RegistrationError("rotation axis must be non-zero")
    x, y, z = a / norm
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle_rad) * K + (1.0 - np.cos(angle_rad)) * (K @ K)


@dataclass(frozen=True)
class PointCloud:
    """Ordered list of 3D points in meters, with optional unit normals."""

    points: np.ndarray
    normals: np.ndarray | None = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise RegistrationError(f"points must be (N, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise RegistrationError("points contain NaN or Inf")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=np.float64)
            if nrm.shape != pts.shape:
                raise RegistrationError("normals must match points in shape")
            lengths = np.linalg.norm(nrm, axis=1)
            if not np.allclose(lengths, 1.0, atol=1e-6):
                raise RegistrationError("normals must have unit length")
            nrm = nrm.copy()
            nrm.flags.writeable = False
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return self.points.shape[0]

    def subset(self, indices) -> PointCloud:
        idx = np.asarray(indices, dtype=np.int64)
        normals = self.normals[idx] if self.normals is not None else None
        return PointCloud(self.points[idx], normals)
