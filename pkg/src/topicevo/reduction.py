"""Word reduction by k-core with a TF-IDF safeguard, and word ranking."""

from __future__ import annotations

from dataclasses import dataclass

from .network import k_core_decomposition


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class RankedWord:
    word: str
    tfidf: float
    core: int

    def to_json(self):
        return {"word": self.word, "tfidf": self.tfidf, "core": self.core}


@dataclass
class ReducedTopic:
    cluster: tuple
    kept_words: list  # RankedWord, ranked
    removed_words: list  # RankedWord, lexicographic
    k: int
    mean_tfidf: float

    def to_json(self):
        return {"kept": [w.to_json() for w in self.kept_words],
                "removed": [w.to_json() for w in self.removed_words],
                "k": self.k, "mean_tfidf": self.mean_tfidf}


def rank_words(words, tfidf, cores):
    """Sort by TF-IDF descending, then core number descending, then word."""
    ranked = [RankedWord(w, float(tfidf.get(w, 0.0)), int(cores.get(w, 0))) for w in words]
    ranked.sort(key=lambda r: (-r.tfidf, -r.core, r.word))
    return ranked


def reduce_words(cluster_graph, k, tfidf, cluster=None):
    """Keep words of core number >= k, then add back dropped words above the snapshot mean TF-IDF.

    ``cluster_graph`` is the cluster's induced subgraph; ``tfidf`` is the
    snapshot's :class:`~topicevo.corpus.TfidfTable`. Words absent from the
    TF-IDF table are never added back.
    """
    if tfidf is None:
        raise ReductionError("missing TF-IDF table for the cluster's snapshot")
    if k < 1:
        raise ReductionError(f"core threshold must be >= 1, got {k}")
    if cluster_graph.n_nodes == 0:
        raise ReductionError("empty cluster graph")
    cores = k_core_decomposition(cluster_graph)
    mean = tfidf.mean
    values = tfidf.values
    kept, removed = [], []
    for w in cluster_graph.nodes:
        if cores[w] >= k or (w in values and values[w] > mean):
            kept.append(w)
        else:
            removed.append(w)
    removed_ranked = sorted((RankedWord(w, float(values.get(w, 0.0)), cores[w]) for w in removed),
                            key=lambda r: r.word)
    return ReducedTopic(cluster, rank_words(kept, values, cores), removed_ranked, k, mean)


def top_n_words(ranked, n):
    if n < 1:
        raise ReductionError("n must be >= 1")
    return list(ranked[:n])
