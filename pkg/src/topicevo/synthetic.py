"""Synthetic corpora, embedding files and 5-gram files with planted topics.

Used by the test-suite, the acceptance checks and the benchmark. Planted
topic words share a centroid in embedding space, co-occur in documents, and
co-occur ``boost`` times more often than cross-topic pairs in the 5-gram file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import year_start
from .embeddings import save_embeddings


@dataclass
class World:
    topics: list  # list of word lists
    background: list

    @property
    def vocabulary(self):
        return [w for t in self.topics for w in t] + list(self.background)


def make_world(n_topics, words_per_topic, n_background=0):
    topics = [[f"t{k}w{i}" for i in range(words_per_topic)] for k in range(n_topics)]
    background = [f"bg{i}" for i in range(n_background)]
    return World(topics, background)


def embedding_vectors(world, dim, rng, noise=(0.4, 1.1), keep=1.0, drift=0.0, centroids=None):
    """Word vectors around per-topic centroids; returns (words, matrix, centroids).

    Each topic word keeps its own noise scale drawn from ``noise`` so a topic
    has a dense core and a looser periphery. ``keep`` < 1 drops a random share
    of each topic's words; ``drift`` perturbs given centroids.
    """
    k = len(world.topics)
    if centroids is None:
        centroids = rng.standard_normal((k, dim))
    else:
        centroids = centroids + drift * rng.standard_normal(centroids.shape)
    centroids = centroids / np.linalg.norm(centroids, axis=1, keepdims=True)
    words, rows = [], []
    for t, topic in enumerate(world.topics):
        for w in topic:
            if keep < 1.0 and rng.random() > keep:
                continue
            sigma = rng.uniform(*noise)
            rows.append(centroids[t] + sigma * rng.standard_normal(dim) / np.sqrt(dim))
            words.append(w)
    for w in world.background:
        rows.append(rng.standard_normal(dim) / np.sqrt(dim))
        words.append(w)
    return words, np.array(rows), centroids


def corpus_records(world, n_docs, years, rng, doc_len=30, topic_share=0.8, prevalence=None):
    """JSON-ready documents with timestamps uniform over ``[years[0], years[1])``."""
    k = len(world.topics)
    p = np.ones(k) / k if prevalence is None else np.asarray(prevalence) / np.sum(prevalence)
    lo, hi = year_start(years[0]), year_start(years[1])
    recs = []
    for i in range(n_docs):
        t = rng.choice(k, p=p)
        topic = world.topics[t]
        zipf = 1.0 / np.arange(1, len(topic) + 1)
        zipf /= zipf.sum()
        n_topic = rng.binomial(doc_len, topic_share) if world.background else doc_len
        toks = list(rng.choice(topic, size=n_topic, p=zipf))
        if world.background:
            toks += list(rng.choice(world.background, size=doc_len - n_topic))
        rng.shuffle(toks)
        recs.append({"id": f"d{years[0]}_{i}", "timestamp": int(rng.integers(lo, hi)),
                     "text": " ".join(toks)})
    return recs


def coherent_share(world, boost, n=5):
    """Share of coherent 5-grams making within-topic pairs ``boost`` x as frequent as cross-topic ones."""
    v = len(world.vocabulary)
    g = len(world.topics[0])
    k = len(world.topics)
    r_u = n * (n - 1) / (v * (v - 1))
    r_c = n * (n - 1) / (g * (g - 1)) / k
    return (boost - 1) * r_u / (r_c + (boost - 1) * r_u)


def ngram_lines(world, n_lines, rng, boost=10.0, year=2000, n=5):
    vocab = np.array(world.vocabulary)
    q = coherent_share(world, boost, n)
    lines = []
    for _ in range(n_lines):
        if rng.random() < q:
            topic = world.topics[rng.integers(len(world.topics))]
            toks = rng.choice(topic, size=n, replace=False)
        else:
            toks = rng.choice(vocab, size=n, replace=False)
        match = int(rng.integers(1, 6))
        lines.append(f"{' '.join(toks)}\t{year}\t{match}\t{match}")
    return lines


def write_fixture(root, n_snapshots=3, docs_per_snapshot=20, n_topics=6, words_per_topic=12,
                  n_background=20, dim=16, start_year=1990, width=5, seed=0,
                  ngram_lines_count=2000, ngram_shards=2, boost=10.0, keep=0.9):
    """Write corpus.jsonl, emb/{t}.vec and ngrams/part-*.tsv under ``root``; return the paths."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    world = make_world(n_topics, words_per_topic, n_background)
    (root / "emb").mkdir(parents=True, exist_ok=True)
    records = []
    centroids = None
    for t in range(n_snapshots):
        years = (start_year + t * width, start_year + (t + 1) * width)
        prevalence = rng.uniform(0.2, 1.0, n_topics)
        records += corpus_records(world, docs_per_snapshot, years, rng, prevalence=prevalence)
        words, vecs, centroids = embedding_vectors(world, dim, rng, keep=keep, drift=0.15,
                                                   centroids=centroids)
        save_embeddings(root / "emb" / f"{t}.vec", words, vecs)
    with open(root / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    paths = {"corpus": str(root / "corpus.jsonl"), "embeddings": str(root / "emb"),
             "world": world}
    if ngram_lines_count:
        (root / "ngrams").mkdir(exist_ok=True)
        lines = ngram_lines(world, ngram_lines_count, rng, boost=boost)
        per = -(-len(lines) // ngram_shards)
        for s in range(ngram_shards):
            with open(root / "ngrams" / f"part-{s}.tsv", "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines[s * per:(s + 1) * per]) + "\n")
        paths["ngrams"] = str(root / "ngrams")
    return paths
