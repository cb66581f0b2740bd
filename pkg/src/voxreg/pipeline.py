"""End-to-end registration: preprocess, describe, match, prune, solve.

``register`` never raises on well-formed clouds. Every stage failure
(nothing reliable to describe, no mutual matches, everything pruned,
degenerate solver geometry) is converted into an invalid result whose
``failure_reason`` names the stage, and the per-stage cardinalities
and timings are recorded either way.
"""

from __future__ import annotations

import time

import numpy as np

from .errors import MatchingError, NoReliablePointsError, SolverDegenerateError
from .features import extract
from .geometry import PointCloud, Pose
from .matching import mutual_match, ratio_filter
from .params import Params
from .preprocess import geometric_suppression, voxel_downsample
from .pruning import prune
from .solver import RegistrationResult, StageRecord, gnc_solve


class _Trace:
    def __init__(self):
        self.records: list[StageRecord] = []
        self._t0 = time.perf_counter()

    def add(self, stage: str, count: int):
        now = time.perf_counter()
        self.records.append(StageRecord(stage=stage, count=int(count), ms=(now - self._t0) * 1e3))
        self._t0 = now


def _failure(trace: _Trace, reason: str) -> RegistrationResult:
    return RegistrationResult(
        pose=Pose.identity(),
        inlier_indices=np.zeros(0, dtype=np.int64),
        weights=np.zeros(0),
        valid=False,
        iterations=0,
    ).with_trace(trace.records, reason)


def register(src: PointCloud, tgt: PointCloud, params: Params) -> RegistrationResult:
    """Estimate the rigid transform mapping ``src`` onto ``tgt``.

    Returns a result whose ``valid`` flag reflects whether a trusted
    consensus was found; inspect ``failure_reason`` and ``stage_trace``
    when it is false.
    """
    trace = _Trace()
    if len(src) < params.tau_num or len(tgt) < params.tau_num:
        return _failure(trace, "preprocess: input cloud has too few points")

    ds = voxel_downsample(src, params.v)
    trace.add("downsample_source", len(ds))
    dt = voxel_downsample(tgt, params.v)
    trace.add("downsample_target", len(dt))

    if params.suppress_dominant_plane:
        ds, _ = geometric_suppression(
            ds, True, params.v, params.min_plane_fraction, params.seed
        )
        trace.add("suppress_source", len(ds))
        dt, _ = geometric_suppression(
            dt, True, params.v, params.min_plane_fraction, params.seed
        )
        trace.add("suppress_target", len(dt))

    if len(ds) < params.tau_num or len(dt) < params.tau_num:
        return _failure(trace, "preprocess: too few points after downsampling")

    try:
        fs = extract(ds, params)
    except NoReliablePointsError:
        return _failure(trace, "extract_source: no reliable points")
    trace.add("extract_source", len(fs))
    try:
        ft = extract(dt, params)
    except NoReliablePointsError:
        return _failure(trace, "extract_target: no reliable points")
    trace.add("extract_target", len(ft))

    try:
        corrs = mutual_match(fs, ft)
    except MatchingError:
        return _failure(trace, "match: empty descriptor set")
    trace.add("mutual_match", len(corrs))
    if len(corrs) == 0:
        return _failure(trace, "match: no mutual matches")

    filtered = ratio_filter(corrs, params.n_tau)
    trace.add("ratio_filter", len(filtered))

    pruned = prune(filtered, ds, dt, params.beta)
    trace.add("prune", len(pruned))
    if len(pruned) == 0:
        return _failure(trace, "prune: no mutually consistent correspondences")
    if len(pruned) < 3:
        return _failure(trace, "solve: fewer than 3 correspondences")

    a = ds.points[pruned.src_indices]
    b = dt.points[pruned.tgt_indices]
    try:
        result = gnc_solve(a, b, params.gnc, params.tau_valid)
    except SolverDegenerateError:
        return _failure(trace, "solve: degenerate correspondence geometry")
    trace.add("solve", result.num_inliers)

    reason = None if result.valid else "validate: final inlier count below threshold"
    return result.with_trace(trace.records, reason)
