import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_network, peel_cores
from topicevo.corpus import TermStats
from topicevo.embeddings import EmbeddingModel
from topicevo.network import (ClusterMetrics, NetworkError, SemanticNetwork, build_network,
                              cluster_centrality, cluster_frequency, density,
                              k_core_decomposition)


def graph(edges, nodes=None):
    return SemanticNetwork.from_edges([(a, b, 1.0) for a, b in edges], nodes=nodes)


def test_identical_vectors_make_a_triangle():
    m = EmbeddingModel(["a", "b", "c"], [[1, 2], [1, 2], [1, 2]])
    net = build_network(m, 0.5, 10)
    assert [(a, b) for a, b, _ in net.edge_list()] == [("a", "b"), ("a", "c"), ("b", "c")]
    assert all(w == pytest.approx(1.0) for _, _, w in net.edge_list())


def test_threshold_excludes_everything():
    m = EmbeddingModel(["a", "b", "c"], np.eye(3))
    net = build_network(m, 0.5, 10)
    assert net.n_nodes == 0 and net.n_edges == 0


@pytest.mark.parametrize("seed", range(4))
def test_network_matches_pairwise_oracle(seed):
    rng = np.random.default_rng(seed)
    words = [f"w{i:03d}" for i in range(200)]
    centres = rng.standard_normal((8, 10))
    vecs = centres[rng.integers(0, 8, 200)] + 0.6 * rng.standard_normal((200, 10))
    m = EmbeddingModel(words, vecs)
    net = build_network(m, 0.5, 10, block=64)
    want = brute_network(words, vecs, 0.5, 10)
    got = {(a, b): w for a, b, w in net.edge_list()}
    assert set(got) == set(want)
    for key, w in want.items():
        assert got[key] == pytest.approx(w, abs=1e-12)
    used = {w for e in want for w in e}
    assert net.nodes == sorted(used)  # no isolated nodes


def test_network_invariants_and_json():
    rng = np.random.default_rng(1)
    m = EmbeddingModel([f"w{i}" for i in range(60)], rng.standard_normal((60, 4)))
    net = build_network(m, 0.3, 5)
    assert np.all(net.weights > 0.3) and np.all(net.weights <= 1.0)
    assert np.all(net.src < net.dst)
    assert np.all(net.degrees > 0)
    back = SemanticNetwork.from_json(json.loads(json.dumps(net.to_json())))
    assert back.edge_list() == net.edge_list()


def test_bad_parameters():
    m = EmbeddingModel(["a", "b"], [[1, 0], [1, 1]])
    with pytest.raises(NetworkError):
        build_network(m, 1.5, 3)
    with pytest.raises(NetworkError):
        build_network(m, 0.5, 0)


def test_density_values():
    tri = graph([("a", "b"), ("b", "c"), ("a", "c")])
    assert density(tri, ["a", "b", "c"]) == 1.0
    path = graph([("a", "b"), ("b", "c")])
    assert density(path, ["a", "b", "c"]) == pytest.approx(2 / 3)
    assert density(path, ["a"]) == 0.0


def test_centrality_values():
    k4 = graph([("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")])
    assert cluster_centrality(k4, ["a", "b"]) == 1.0
    star = graph([("hub", x) for x in "pqrs"])
    assert cluster_centrality(star, ["hub"]) == 1.0
    assert cluster_centrality(star, ["p"]) == 0.25
    with pytest.raises(NetworkError):
        cluster_centrality(star, ["nope"])


def test_cluster_frequency_min_max():
    stats = {0: TermStats(0, {"a": 10, "b": 30, "c": 20}, 60)}
    assert cluster_frequency({(0, 0): ["a"], (0, 1): ["b"]}, stats) == {(0, 0): 0.0, (0, 1): 1.0}
    three = cluster_frequency({(0, 0): ["a"], (0, 1): ["c"], (0, 2): ["b"]}, stats)
    assert three == {(0, 0): 0.0, (0, 1): 0.5, (0, 2): 1.0}
    assert set(cluster_frequency({(0, 0): ["a"], (0, 1): ["a"]}, stats).values()) == {0.0}


def test_cluster_frequency_across_snapshots_uses_own_counts():
    stats = {0: {"a": 4}, 1: {"a": 8, "b": 0}}
    cf = cluster_frequency({(0, 0): ["a"], (1, 0): ["a", "b"], (1, 1): ["a"]}, stats)
    assert cf == {(0, 0): 0.0, (1, 0): 0.0, (1, 1): 1.0}


def test_core_examples():
    k4 = graph([("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")])
    assert set(k_core_decomposition(k4).values()) == {3}
    tp = graph([("a", "b"), ("b", "c"), ("a", "c"), ("c", "p")])
    assert k_core_decomposition(tp) == {"a": 2, "b": 2, "c": 2, "p": 1}
    assert k_core_decomposition(graph([], nodes=["x", "y"])) == {"x": 0, "y": 0}
    assert k_core_decomposition(graph([])) == {}


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 40), st.floats(0.02, 0.5), st.integers(0, 2**32 - 1))
def test_cores_match_peeling(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [(f"n{a}", f"n{b}") for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    nodes = [f"n{i}" for i in range(n)]
    assert k_core_decomposition(graph(edges, nodes)) == peel_cores(nodes, edges)


def test_subgraph_is_induced():
    g = graph([("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")])
    sub = g.subgraph(["a", "b", "c"])
    assert [(a, b) for a, b, _ in sub.edge_list()] == [("a", "b"), ("b", "c")]
    with pytest.raises(NetworkError):
        g.subgraph(["zz"])


def test_metrics_json():
    m = ClusterMetrics(4, 0.5, 0.25, 0.75)
    assert ClusterMetrics.from_json(json.loads(json.dumps(m.to_json()))) == m
