"""Seeded Louvain clustering of semantic networks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class CommunityError(ValueError):
    pass


@dataclass
class Partition:
    snapshot_index: object
    assignment: dict  # word -> cluster id
    modularity: float

    def clusters(self):
        """Cluster id -> sorted word list."""
        out = {}
        for w, c in self.assignment.items():
            out.setdefault(c, []).append(w)
        return {c: sorted(ws) for c, ws in sorted(out.items())}

    def to_json(self):
        return {"clusters": {str(c): ws for c, ws in self.clusters().items()},
                "modularity": self.modularity}

    @classmethod
    def from_json(cls, obj, snapshot_index=None):
        assignment = {}
        for c, words in obj["clusters"].items():
            for w in words:
                assignment[w] = int(c)
        return cls(snapshot_index, assignment, float(obj["modularity"]))


def _graph_weights(network, weighted):
    return network.csr_weights if weighted else np.ones_like(network.csr_weights)


def modularity(network, assignment, resolution=1.0, weighted=True):
    """Newman modularity of ``assignment`` (word -> community label) on ``network``."""
    labels = {}
    comm = np.empty(network.n_nodes, dtype=np.int64)
    for i, w in enumerate(network.nodes):
        if w not in assignment:
            raise CommunityError(f"node {w!r} has no community assignment")
        comm[i] = labels.setdefault(assignment[w], len(labels))
    return kernels.modularity_csr(network.indptr, network.indices,
                                  _graph_weights(network, weighted), comm, resolution)


def louvain(network, seed, resolution=1.0, weighted=True, tol=1e-7):
    """Two-phase Louvain; identical ``(network, seed)`` always gives the identical partition.

    Cluster ids are contiguous and numbered by first appearance over the
    sorted node list.
    """
    if network.n_nodes == 0:
        raise CommunityError("cannot cluster an empty network")
    weights = _graph_weights(network, weighted)
    membership = kernels.louvain_csr(network.indptr, network.indices, weights, seed,
                                     resolution=resolution, tol=tol)
    q = kernels.modularity_csr(network.indptr, network.indices, weights, membership, resolution)
    assignment = {w: int(c) for w, c in zip(network.nodes, membership)}
    return Partition(network.snapshot_index, assignment, q)
