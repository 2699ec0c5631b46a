import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import best_modularity, dense_modularity
from topicevo import kernels
from topicevo.community import CommunityError, Partition, louvain, modularity
from topicevo.network import SemanticNetwork


def net_from(weighted_edges, nodes=None):
    return SemanticNetwork.from_edges(weighted_edges, nodes=nodes)


def two_cliques():
    edges = [(f"a{i}", f"a{j}", 1.0) for i, j in itertools.combinations(range(5), 2)]
    edges += [(f"b{i}", f"b{j}", 1.0) for i, j in itertools.combinations(range(5), 2)]
    return net_from(edges)


def test_two_disjoint_cliques():
    part = louvain(two_cliques(), seed=0)
    groups = sorted(sorted(ws) for ws in part.clusters().values())
    assert groups == [[f"a{i}" for i in range(5)], [f"b{i}" for i in range(5)]]
    assert part.modularity == pytest.approx(0.5)


def test_single_edge():
    part = louvain(net_from([("a", "b", 0.7)]), seed=3)
    assert part.assignment == {"a": 0, "b": 0}


def test_single_community_has_zero_modularity():
    net = two_cliques()
    assert modularity(net, {w: 0 for w in net.nodes}) == pytest.approx(0.0, abs=1e-15)


def test_modularity_matches_dense_formula():
    rng = random.Random(2)
    for _ in range(30):
        n = rng.randint(3, 15)
        nodes = [f"v{i}" for i in range(n)]
        edges = [(nodes[a], nodes[b], rng.uniform(0.5, 1.0))
                 for a, b in itertools.combinations(range(n), 2) if rng.random() < 0.4]
        if not edges:
            continue
        net = net_from(edges)
        labels = {w: rng.randrange(4) for w in net.nodes}
        for res in (1.0, 0.5):
            want = dense_modularity(net.nodes, edges, labels, res)
            assert modularity(net, labels, resolution=res) == pytest.approx(want, abs=1e-9)


def test_missing_assignment():
    with pytest.raises(CommunityError):
        modularity(two_cliques(), {"a0": 0})


def test_empty_network_rejected():
    with pytest.raises(CommunityError):
        louvain(net_from([]), seed=0)


def test_no_single_node_move_improves():
    rng = random.Random(17)
    for trial in range(25):
        n = rng.randint(4, 14)
        nodes = [f"v{i:02d}" for i in range(n)]
        edges = [(nodes[a], nodes[b], rng.uniform(0.5, 1.0))
                 for a, b in itertools.combinations(range(n), 2) if rng.random() < 0.35]
        if not edges:
            continue
        net = net_from(edges)
        part = louvain(net, seed=trial)
        q = dense_modularity(net.nodes, edges, part.assignment)
        fresh = max(part.assignment.values()) + 1
        for w in net.nodes:
            for c in set(part.assignment.values()) | {fresh}:
                moved = dict(part.assignment, **{w: c})
                assert dense_modularity(net.nodes, edges, moved) <= q + 1e-7


def test_close_to_optimum_on_tiny_graphs():
    # graphs whose optimal split is unambiguous
    for edges in ([("a", "b", 1), ("b", "c", 1), ("c", "a", 1), ("d", "e", 1)],
                  [("a", "b", 1), ("c", "d", 1), ("b", "c", 0.1)]):
        net = net_from(edges)
        assert louvain(net, 0).modularity == pytest.approx(best_modularity(net.nodes, edges))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(4, 40))
def test_partition_properties(seed, n):
    rng = np.random.default_rng(seed)
    nodes = [f"v{i:02d}" for i in range(n)]
    edges = [(nodes[a], nodes[b], float(rng.uniform(0.5, 1)))
             for a, b in itertools.combinations(range(n), 2) if rng.random() < 0.2]
    if not edges:
        return
    net = net_from(edges)
    part = louvain(net, seed=seed % 1000)
    ids = sorted(set(part.assignment.values()))
    assert ids == list(range(len(ids)))  # dense ids
    assert set(part.assignment) == set(net.nodes)
    # ids by first appearance over the sorted node list
    first = []
    for w in net.nodes:
        if part.assignment[w] not in first:
            first.append(part.assignment[w])
    assert first == ids
    assert part.modularity == pytest.approx(modularity(net, part.assignment), abs=1e-12)
    assert louvain(net, seed=seed % 1000).assignment == part.assignment


def test_levels_never_lower_modularity():
    rng = np.random.default_rng(4)
    n = 120
    blocks = rng.integers(0, 6, n)
    src, dst = [], []
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < (0.3 if blocks[a] == blocks[b] else 0.02):
                src.append(a)
                dst.append(b)
    net = SemanticNetwork([f"v{i:03d}" for i in range(n)], src, dst, np.ones(len(src)))
    trace = []
    kernels.louvain_csr(net.indptr, net.indices, net.csr_weights, 0, trace=trace)
    assert trace
    for _, before, after in trace:
        assert after >= before - 1e-12


def test_partition_json_roundtrip():
    part = louvain(two_cliques(), seed=1)
    back = Partition.from_json(json.loads(json.dumps(part.to_json())))
    assert back.assignment == part.assignment
    assert back.modularity == part.modularity


def test_unweighted_option_ignores_weights():
    edges = [("a", "b", 0.99), ("b", "c", 0.51), ("c", "d", 0.99)]
    net = net_from(edges)
    unit = net_from([(a, b, 1.0) for a, b, _ in edges])
    assert louvain(net, 0, weighted=False).assignment == louvain(unit, 0).assignment
