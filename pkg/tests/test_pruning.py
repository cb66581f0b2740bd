"""Consistency graph construction and core-based pruning."""

import numpy as np
import pytest

from oracles import (
    all_max_cliques,
    dense_compat_edges,
    er_edges,
    oracle_core_numbers,
    planted_clique_edges,
)
from voxreg.errors import RegistrationError
from voxreg.geometry import PointCloud, Pose, rotation_from_axis_angle
from voxreg.matching import from_index_pairs
from voxreg.pruning import (
    CompatGraph,
    build_compat_graph,
    compatibility_test,
    core_numbers,
    dump_graph,
    from_edge_list,
    max_kcore,
    prune,
)


def test_csr_round_trip():
    edges = [(0, 1), (1, 2), (0, 2), (2, 3)]
    g = from_edge_list(5, edges)
    assert g.vertex_count == 5
    assert g.edge_count == 4
    assert sorted(map(tuple, g.edge_list().tolist())) == sorted(edges)
    assert g.neighbors(2).tolist() == [0, 1, 3]
    assert g.neighbors(4).tolist() == []


def test_from_edge_list_rejects_self_loops_and_range():
    with pytest.raises(RegistrationError):
        from_edge_list(3, [(1, 1)])
    with pytest.raises(RegistrationError):
        from_edge_list(3, [(0, 3)])


def test_csr_validation():
    with pytest.raises(RegistrationError):
        CompatGraph(np.array([1, 2], dtype=np.int64), np.array([0], dtype=np.int64))
    with pytest.raises(RegistrationError):
        CompatGraph(np.array([0, 2], dtype=np.int64), np.array([0], dtype=np.int64))


def test_core_numbers_hand_cases():
    # Triangle with a tail vertex.
    g = from_edge_list(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    assert core_numbers(g).tolist() == [2, 2, 2, 1]
    # No edges at all.
    assert core_numbers(from_edge_list(3, np.zeros((0, 2)))).tolist() == [0, 0, 0]
    # Empty graph.
    assert core_numbers(from_edge_list(0, np.zeros((0, 2)))).tolist() == []
    # Star: hub degree 4 but core number 1 everywhere.
    star = from_edge_list(5, [(0, i) for i in range(1, 5)])
    assert core_numbers(star).tolist() == [1, 1, 1, 1, 1]


def test_core_numbers_match_iterative_deletion():
    rng = np.random.default_rng(21)
    for _ in range(60):
        n = int(rng.integers(1, 120))
        p = float(rng.uniform(0.0, 0.35))
        edges = er_edges(rng, n, p)
        g = from_edge_list(n, edges)
        assert core_numbers(g).tolist() == oracle_core_numbers(n, edges)


def test_max_core_vertices_have_enough_internal_degree():
    rng = np.random.default_rng(22)
    for _ in range(20):
        n = int(rng.integers(5, 80))
        edges = er_edges(rng, n, 0.15)
        g = from_edge_list(n, edges)
        cores = core_numbers(g)
        members = max_kcore(g)
        if members.size == 0:
            assert int(cores.max(initial=0)) == 0
            continue
        k_star = int(cores.max())
        member_set = set(members.tolist())
        for u in members:
            inside = sum(1 for w in g.neighbors(int(u)) if int(w) in member_set)
            assert inside >= k_star


def test_max_core_prefers_larger_clique():
    edges = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    edges += [(5 + i, 5 + j) for i in range(3) for j in range(i + 1, 3)]
    g = from_edge_list(8, edges)
    assert max_kcore(g).tolist() == [0, 1, 2, 3, 4]


def test_edgeless_graph_has_empty_max_core():
    g = from_edge_list(4, np.zeros((0, 2)))
    assert max_kcore(g).tolist() == []


def test_max_core_contains_a_maximum_clique_on_planted_graphs():
    rng = np.random.default_rng(23)
    for _ in range(40):
        n, edges = planted_clique_edges(rng)
        core = set(max_kcore(from_edge_list(n, edges)).tolist())
        assert any(c <= core for c in all_max_cliques(n, edges))


def test_compatibility_boundary_is_inclusive():
    src = PointCloud(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    tgt = PointCloud(np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    corrs = from_index_pairs([0, 1], [0, 1])
    # Source span 1, target span 2: gap exactly 2*beta at beta=0.5.
    assert compatibility_test(corrs[0], corrs[1], src, tgt, 0.5)
    assert not compatibility_test(corrs[0], corrs[1], src, tgt, 0.499)


def test_compat_graph_matches_dense_oracle():
    rng = np.random.default_rng(24)
    for seed in range(4):
        k = 40
        a = rng.uniform(0, 10, size=(k, 3))
        R = rotation_from_axis_angle([0, 0, 1], 0.7)
        b = a @ R.T + rng.normal(0, 0.05, size=(k, 3))
        # Corrupt a third of the pairs.
        b[::3] = rng.uniform(0, 10, size=(len(b[::3]), 3))
        corrs = from_index_pairs(np.arange(k), np.arange(k))
        g = build_compat_graph(corrs, PointCloud(a), PointCloud(b), 0.15)
        got = set(map(tuple, g.edge_list().tolist()))
        assert got == dense_compat_edges(a, b, 0.15)


def test_build_compat_graph_rejects_empty():
    empty = from_index_pairs([], [])
    cloud = PointCloud(np.zeros((1, 3)))
    with pytest.raises(RegistrationError):
        build_compat_graph(empty, cloud, cloud, 0.1)


def test_prune_keeps_the_consistent_block():
    rng = np.random.default_rng(25)
    n_in, n_out = 30, 20
    a = rng.uniform(0, 10, size=(n_in + n_out, 3))
    pose = Pose(rotation_from_axis_angle([1, 1, 0], 1.1), np.array([4.0, -2.0, 0.5]))
    b = pose.apply(a)
    b[n_in:] = rng.uniform(30, 60, size=(n_out, 3))
    corrs = from_index_pairs(np.arange(len(a)), np.arange(len(a)))
    kept = prune(corrs, PointCloud(a), PointCloud(b), 0.05)
    assert set(kept.src_indices.tolist()) == set(range(n_in))


def test_prune_of_empty_set_is_empty():
    empty = from_index_pairs([], [])
    cloud = PointCloud(np.zeros((1, 3)))
    out = prune(empty, cloud, cloud, 0.1)
    assert len(out) == 0


def test_prune_with_no_consistent_pairs_is_empty():
    """Every pair violates the length test: the graph is edgeless."""
    a = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    b = np.array([[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [30.0, 0.0, 0.0]])
    corrs = from_index_pairs([0, 1, 2], [0, 1, 2])
    out = prune(corrs, PointCloud(a), PointCloud(b), 0.01)
    assert len(out) == 0


def test_dump_graph_formats():
    g = from_edge_list(3, [(0, 1), (1, 2)])
    plain = dump_graph(g).strip().split("\n")
    assert plain == ["0 1", "1 2"]
    cores = core_numbers(g)
    with_cores = dump_graph(g, cores).strip().split("\n")
    assert with_cores == ["0 1 1", "1 2 1"]
