"""Exact radius search semantics: strict boundary, self-inclusion, counting."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_radius
from voxreg.errors import EmptyCloudError
from voxreg.geometry import PointCloud
from voxreg.neighbors import RadiusSearcher, build_index, radius_search


def _cloud(seed, n=80, scale=3.0):
    return PointCloud(np.random.default_rng(seed).uniform(-scale, scale, size=(n, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5_000), st.floats(0.1, 4.0))
def test_matches_brute_force_scan(seed, radius):
    cloud = _cloud(seed)
    searcher = RadiusSearcher(cloud)
    rng = np.random.default_rng(seed + 1)
    for _ in range(5):
        q = int(rng.integers(len(cloud)))
        got = searcher.radius_neighbors(cloud.points[q], radius).tolist()
        assert got == brute_radius(cloud.points, cloud.points[q], radius)


def test_boundary_is_strictly_inside():
    """Points at exactly the radius do not count."""
    pts = np.array([
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.5, 0.0, 0.0],
    ])
    searcher = RadiusSearcher(PointCloud(pts))
    got = searcher.radius_neighbors(pts[0], 1.0).tolist()
    assert got == [0, 3]
    got = searcher.radius_neighbors(pts[0], 1.0 + 1e-9).tolist()
    assert got == [0, 1, 2, 3]


def test_query_point_includes_itself():
    cloud = _cloud(9)
    searcher = RadiusSearcher(cloud)
    for q in (0, 17, 42):
        got = searcher.radius_neighbors(cloud.points[q], 0.5)
        assert q in got.tolist()


def test_results_are_sorted_ascending():
    cloud = _cloud(10)
    searcher = RadiusSearcher(cloud)
    got = searcher.radius_neighbors(cloud.points[3], 2.5)
    assert np.array_equal(got, np.sort(got))


def test_query_count_instrumentation():
    cloud = _cloud(11, n=30)
    searcher = RadiusSearcher(cloud)
    assert searcher.query_count == 0
    searcher.radius_neighbors(cloud.points[0], 1.0)
    assert searcher.query_count == 1
    searcher.radius_neighbors_batch(cloud.points[:7], 1.0)
    assert searcher.query_count == 8


def test_batch_agrees_with_single_queries():
    cloud = _cloud(12, n=50)
    searcher = RadiusSearcher(cloud)
    batch = searcher.radius_neighbors_batch(cloud.points[:10], 1.7)
    for row, center in zip(batch, cloud.points[:10]):
        single = searcher.radius_neighbors(center, 1.7)
        assert np.array_equal(row, single)


def test_empty_cloud_is_an_error():
    with pytest.raises(EmptyCloudError):
        RadiusSearcher(PointCloud(np.zeros((0, 3))))


def test_module_level_helpers():
    cloud = _cloud(13, n=20)
    idx = build_index(cloud)
    got = radius_search(idx, cloud.points[4], 2.0)
    assert got.tolist() == brute_radius(cloud.points, cloud.points[4], 2.0)
