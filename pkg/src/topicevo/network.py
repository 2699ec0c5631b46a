"""Semantic similarity networks and the graph metrics used for topic filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .embeddings import top_k_indices


class NetworkError(ValueError):
    pass


class SemanticNetwork:
    """Undirected weighted word graph for one snapshot.

    ``nodes`` is sorted; edges are index pairs ``(lo, hi)`` with ``lo < hi``,
    sorted, so the JSON form is byte-stable.
    """

    def __init__(self, nodes, src, dst, weights, snapshot_index=None):
        self.nodes = list(nodes)
        self.index = {w: i for i, w in enumerate(self.nodes)}
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        if np.any(lo == hi):
            raise NetworkError("self-loops are not allowed")
        order = np.lexsort((hi, lo))
        self.src, self.dst = lo[order], hi[order]
        self.weights = np.asarray(weights, dtype=np.float64)[order]
        self.snapshot_index = snapshot_index
        n = len(self.nodes)
        both_src = np.concatenate([self.src, self.dst])
        both_dst = np.concatenate([self.dst, self.src])
        both_w = np.concatenate([self.weights, self.weights])
        perm = np.lexsort((both_dst, both_src))
        self.indices = both_dst[perm]
        self.csr_weights = both_w[perm]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both_src, minlength=n), out=self.indptr[1:])
        self.degrees = np.diff(self.indptr)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.src)

    def degree(self, word):
        return int(self.degrees[self.index[word]])

    def neighbors(self, word):
        i = self.index[word]
        return [self.nodes[j] for j in self.indices[self.indptr[i]:self.indptr[i + 1]]]

    def edge_list(self):
        return [(self.nodes[a], self.nodes[b], float(w))
                for a, b, w in zip(self.src, self.dst, self.weights)]

    def to_json(self):
        return {"nodes": self.nodes,
                "edges": [[a, b, w] for a, b, w in self.edge_list()]}

    @classmethod
    def from_json(cls, obj, snapshot_index=None):
        nodes = list(obj["nodes"])
        index = {w: i for i, w in enumerate(nodes)}
        edges = obj["edges"]
        src = [index[a] for a, _, _ in edges]
        dst = [index[b] for _, b, _ in edges]
        return cls(nodes, src, dst, [float(w) for _, _, w in edges], snapshot_index)

    @classmethod
    def from_edges(cls, edges, nodes=None, snapshot_index=None):
        """Build from ``(word, word, weight)`` triples; extra isolated ``nodes`` are allowed here."""
        names = set(nodes or ())
        for a, b, _ in edges:
            names.update((a, b))
        ordered = sorted(names)
        index = {w: i for i, w in enumerate(ordered)}
        seen = {}
        for a, b, w in edges:
            key = (min(index[a], index[b]), max(index[a], index[b]))
            seen[key] = float(w)
        keys = sorted(seen)
        return cls(ordered, [k[0] for k in keys], [k[1] for k in keys],
                   [seen[k] for k in keys], snapshot_index)

    def subgraph(self, words):
        """Induced subgraph on ``words`` (all must be nodes); isolated members are kept."""
        missing = [w for w in words if w not in self.index]
        if missing:
            raise NetworkError(f"words not in network: {sorted(missing)[:5]}")
        keep = np.zeros(self.n_nodes, dtype=bool)
        keep[[self.index[w] for w in words]] = True
        mask = keep[self.src] & keep[self.dst]
        new_ids = np.cumsum(keep) - 1
        nodes = [w for w, k in zip(self.nodes, keep) if k]
        return SemanticNetwork(nodes, new_ids[self.src[mask]], new_ids[self.dst[mask]],
                               self.weights[mask], self.snapshot_index)


def build_network(model, phi, tau, block=1024):
    """Directed top-``tau`` neighbour queries, union-merged, thresholded at ``phi``.

    An undirected edge exists if either endpoint has the other among its
    ``tau`` nearest neighbours and their cosine strictly exceeds ``phi``. The
    weight is computed once per unordered pair so it is exactly symmetric.
    Words left without edges are not nodes.
    """
    if not 0.0 <= phi < 1.0:
        raise NetworkError(f"phi must lie in [0, 1), got {phi}")
    if tau < 1:
        raise NetworkError(f"tau must be >= 1, got {tau}")
    unit = model.unit
    vocab = unit.shape[0]
    k = min(tau, vocab - 1)
    if k == 0:
        return SemanticNetwork([], [], [], [], model.snapshot_index)
    rows, cols = [], []
    for start in range(0, vocab, block):
        stop = min(start + block, vocab)
        scores = unit[start:stop] @ unit.T
        scores[np.arange(stop - start), np.arange(start, stop)] = -np.inf
        idx = top_k_indices(scores, k)
        rows.append(np.repeat(np.arange(start, stop), k))
        cols.append(idx.ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    pairs = np.unique(lo * vocab + hi)
    lo, hi = pairs // vocab, pairs % vocab
    w = np.einsum("ij,ij->i", unit[lo], unit[hi])
    np.clip(w, -1.0, 1.0, out=w)
    keep = w > phi
    lo, hi, w = lo[keep], hi[keep], w[keep]
    used = np.unique(np.concatenate([lo, hi]))
    remap = np.full(vocab, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    nodes = [model.words[i] for i in used]
    return SemanticNetwork(nodes, remap[lo], remap[hi], w, model.snapshot_index)


def _cluster_ids(network, cluster):
    ids = []
    for w in cluster:
        if w not in network.index:
            raise NetworkError(f"{w!r} is not a node of the network")
        ids.append(network.index[w])
    return np.unique(np.asarray(ids, dtype=np.int64))


def density(network, cluster):
    ids = _cluster_ids(network, cluster)
    n = len(ids)
    if n < 2:
        return 0.0
    member = np.zeros(network.n_nodes, dtype=bool)
    member[ids] = True
    inner = int(np.count_nonzero(member[network.src] & member[network.dst]))
    return 2.0 * inner / (n * (n - 1))


def cluster_centrality(network, cluster):
    """Mean normalised degree of the cluster's words within the whole snapshot network."""
    if network.n_nodes < 2:
        raise NetworkError("centrality needs a network with at least two nodes")
    ids = _cluster_ids(network, cluster)
    if len(ids) == 0:
        raise NetworkError("empty cluster")
    return float(np.mean(network.degrees[ids] / (network.n_nodes - 1)))


def raw_cluster_frequency(words, counts):
    if not words:
        raise NetworkError("empty cluster")
    return sum(counts.get(w, 0) for w in words) / len(words)


def cluster_frequency(clusters, term_stats):
    """Min-max normalised mean raw word count per cluster, across all snapshots.

    ``clusters`` maps a key ``(t, cluster_id)`` to its word collection and
    ``term_stats`` maps ``t`` to :class:`~topicevo.corpus.TermStats` (or a plain
    count dict). If every cluster has the same raw mean, all values are 0.
    """
    raw = {}
    for key, words in clusters.items():
        stats = term_stats[key[0]]
        counts = stats.counts if hasattr(stats, "counts") else stats
        raw[key] = raw_cluster_frequency(list(words), counts)
    if not raw:
        return {}
    lo, hi = min(raw.values()), max(raw.values())
    if hi == lo:
        return {key: 0.0 for key in raw}
    return {key: (v - lo) / (hi - lo) for key, v in raw.items()}


def k_core_decomposition(network):
    """Core number of every node, as ``{word: k}``."""
    if network.n_nodes == 0:
        return {}
    cores = kernels.core_numbers(network.indptr, network.indices)
    return {w: int(c) for w, c in zip(network.nodes, cores)}


@dataclass(frozen=True)
class ClusterMetrics:
    size: int
    centrality: float
    density: float
    cluster_frequency: float

    def to_json(self):
        return {"size": self.size, "centrality": self.centrality, "density": self.density,
                "cluster_frequency": self.cluster_frequency}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["size"]), float(obj["centrality"]), float(obj["density"]),
                   float(obj["cluster_frequency"]))
