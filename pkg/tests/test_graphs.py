import numpy as np
import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from rulegnn.errors import ContractError, StructuralError
from rulegnn.graphs import (
    UNREACHABLE,
    LabeledGraph,
    all_pairs_distances,
    are_isomorphic,
    diameter,
    graph_from_edges,
    permute_graph,
)


def cycle(n, labels=None):
    return graph_from_edges(
        [(i, (i + 1) % n) for i in range(n)], node_count=n, node_labels=labels
    )


def random_graph(rng, n, p=0.3, labels=None):
    edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p
    ]
    if labels is None:
        labels = rng.integers(0, 3, size=n)
    return graph_from_edges(edges, node_count=n, node_labels=labels)


class TestLabeledGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(StructuralError):
            LabeledGraph(2, ((0, 0),), np.zeros(2))

    def test_rejects_out_of_range_edge(self):
        with pytest.raises(StructuralError):
            LabeledGraph(2, ((0, 2),), np.zeros(2))

    def test_rejects_parallel_edge(self):
        with pytest.raises(StructuralError):
            LabeledGraph(3, ((0, 1), (1, 0)), np.zeros(3))

    def test_rejects_label_length_mismatch(self):
        with pytest.raises(StructuralError):
            LabeledGraph(3, ((0, 1),), np.zeros(2))

    def test_edges_normalized_sorted(self):
        g = LabeledGraph(3, ((2, 1), (1, 0)), np.zeros(3))
        assert g.edges == ((0, 1), (1, 2))

    def test_degrees_and_adjacency(self):
        g = graph_from_edges([(0, 1), (0, 2), (0, 3)], node_count=4)
        assert g.degrees.tolist() == [3, 1, 1, 1]
        assert g.adjacency[0] == [1, 2, 3]


class TestDistances:
    def test_cycle_antipodal(self):
        # antipodal points on an even cycle sit half the length apart
        dist = all_pairs_distances(cycle(16))
        for i in range(16):
            assert dist[i][(i + 8) % 16] == 8

    def test_path_endpoints(self):
        g = graph_from_edges([(0, 1), (1, 2)], node_count=3)
        assert all_pairs_distances(g)[0, 2] == 2

    def test_disconnected_sentinel(self):
        g = graph_from_edges([(0, 1), (2, 3)], node_count=4)
        dist = all_pairs_distances(g)
        assert dist[0, 2] == UNREACHABLE
        assert dist[1, 3] == UNREACHABLE
        assert dist[0, 1] == 1

    def test_edgeless_graph(self):
        g = graph_from_edges([], node_count=3)
        dist = all_pairs_distances(g)
        assert dist[0, 0] == 0
        assert dist[0, 1] == UNREACHABLE

    def test_invariants_on_random_graphs(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            g = random_graph(rng, int(rng.integers(2, 15)))
            dist = all_pairs_distances(g)
            assert np.array_equal(dist, dist.T)
            assert (np.diag(dist) == 0).all()
            ones = {(u, v) for u, v in g.edges} | {(v, u) for u, v in g.edges}
            got = {tuple(p) for p in np.argwhere(dist == 1)}
            assert got == ones
            # triangle inequality over finite entries
            n = g.node_count
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        if UNREACHABLE in (dist[i, j], dist[j, k], dist[i, k]):
                            continue
                        assert dist[i, k] <= dist[i, j] + dist[j, k]

    def test_diameter_of_cycle(self):
        assert diameter(cycle(100)) == 50


class TestPermute:
    def test_identity(self):
        g = cycle(5, labels=[1, 2, 3, 4, 5])
        assert permute_graph(g, np.arange(5)) == g

    def test_triangle_invariant(self):
        g = cycle(3)
        for perm in ([1, 2, 0], [2, 1, 0]):
            assert permute_graph(g, perm).edges == g.edges

    def test_path_swap_endpoints(self):
        g = graph_from_edges([(0, 1), (1, 2)], node_count=3, node_labels=[7, 8, 9])
        h = permute_graph(g, [2, 1, 0])
        assert h.edges == ((0, 1), (1, 2))
        assert h.node_labels.tolist() == [9, 8, 7]

    def test_rejects_non_bijection(self):
        g = cycle(4)
        with pytest.raises(ContractError):
            permute_graph(g, [0, 0, 1, 2])

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_distance_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, int(rng.integers(2, 12)))
        perm = rng.permutation(g.node_count)
        d0 = all_pairs_distances(g)
        d1 = all_pairs_distances(permute_graph(g, perm))
        for i in range(g.node_count):
            for j in range(g.node_count):
                assert d1[perm[i], perm[j]] == d0[i, j]


class TestIsomorphism:
    def test_matches_networkx_on_random_pairs(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            n = int(rng.integers(2, 9))
            a = random_graph(rng, n, p=0.4)
            b = random_graph(rng, n, p=0.4)
            ga = nx.Graph(list(a.edges))
            gb = nx.Graph(list(b.edges))
            ga.add_nodes_from(range(n))
            gb.add_nodes_from(range(n))
            assert are_isomorphic(a, b) == nx.is_isomorphic(ga, gb)

    def test_permuted_graph_is_isomorphic(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            g = random_graph(rng, 10, p=0.3)
            h = permute_graph(g, rng.permutation(10))
            assert are_isomorphic(g, h)
