"""Word-vector loading and exact cosine neighbour queries."""

from __future__ import annotations

import gzip
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityHit:
    word: str
    score: float


class EmbeddingModel:
    """Immutable set of word vectors for one snapshot.

    Words are stored in lexicographic order; ``unit`` holds the row-normalised
    vectors used for every cosine computation.
    """

    def __init__(self, words, vectors, snapshot_index=None):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words) or vectors.shape[0] == 0:
            raise EmbeddingError("need a non-empty (vocab, dim) matrix matching the word list")
        if vectors.shape[1] < 1:
            raise EmbeddingError("vector dimension must be >= 1")
        if len(set(words)) != len(words):
            raise EmbeddingError("duplicate word in vocabulary")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms == 0) or not np.all(np.isfinite(norms)):
            bad = words[int(np.flatnonzero((norms == 0) | ~np.isfinite(norms))[0])]
            raise EmbeddingError(f"zero-norm or non-finite vector for {bad!r}")
        order = np.argsort(np.asarray(words, dtype=object), kind="stable")
        self.words = [words[i] for i in order]
        self.vectors = vectors[order]
        self.vectors.setflags(write=False)
        self.unit = self.vectors / norms[order][:, None]
        self.unit.setflags(write=False)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.snapshot_index = snapshot_index

    @property
    def dimension(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def vector(self, word):
        return self.vectors[self.index[word]]


def _open_text(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def load_embeddings(path, snapshot_index=None):
    """Parse the word2vec text format: a ``"<count> <dim>"`` header, then one word per line."""
    with _open_text(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"{path}: header must be '<vocab_count> <dimension>'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingError(f"{path}: non-integer header {header}") from None
        words = []
        rows = []
        seen = set()
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").split(" ")
            if parts and parts[-1] == "":
                parts.pop()
            if not parts or parts == [""]:
                continue
            word, vals = parts[0], parts[1:]
            if len(vals) != dim:
                raise EmbeddingError(
                    f"{path}:{lineno}: dimension mismatch for {word!r}: {len(vals)} values, header says {dim}")
            if word in seen:
                raise EmbeddingError(f"{path}:{lineno}: duplicate word {word!r}")
            seen.add(word)
            words.append(word)
            try:
                rows.append([float(v) for v in vals])
            except ValueError:
                raise EmbeddingError(f"{path}:{lineno}: non-numeric value") from None
    if len(words) != count:
        raise EmbeddingError(f"{path}: header declares {count} words, found {len(words)}")
    return EmbeddingModel(words, np.array(rows, dtype=np.float64).reshape(len(words), dim),
                          snapshot_index=snapshot_index)


def save_embeddings(path, words, vectors):
    vectors = np.asarray(vectors, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {vectors.shape[1]}\n")
        for w, v in zip(words, vectors):
            fh.write(w + " " + " ".join(repr(float(x)) for x in v) + "\n")


def cosine_similarity(v_i, v_j):
    v_i = np.asarray(v_i, dtype=np.float64)
    v_j = np.asarray(v_j, dtype=np.float64)
    if v_i.shape != v_j.shape:
        raise EmbeddingError(f"dimension mismatch {v_i.shape} vs {v_j.shape}")
    n_i = np.linalg.norm(v_i)
    n_j = np.linalg.norm(v_j)
    if n_i == 0 or n_j == 0:
        raise EmbeddingError("cosine of a zero-norm vector is undefined")
    return float(min(1.0, max(-1.0, np.dot(v_i, v_j) / (n_i * n_j))))


def top_k_indices(scores, k):
    """Indices of the ``k`` largest entries, score descending, ties by lower index.

    ``scores`` is a 2-D block; rows are handled independently. Entries equal to
    ``-inf`` are never returned unless a row has fewer than ``k`` finite scores.
    """
    n_rows, n_cols = scores.shape
    k = min(k, n_cols)
    if k <= 0:
        return np.empty((n_rows, 0), dtype=np.int64)
    kth = np.partition(scores, n_cols - k, axis=1)[:, n_cols - k]
    out = np.empty((n_rows, k), dtype=np.int64)
    for r in range(n_rows):
        cand = np.flatnonzero(scores[r] >= kth[r])
        order = np.argsort(-scores[r, cand], kind="stable")[:k]
        out[r] = cand[order]
    return out


def top_similar(model, word, tau):
    """The ``tau`` most cosine-similar words to ``word`` (excluding itself)."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if word not in model.index:
        raise KeyError(f"{word!r} is not in the vocabulary")
    i = model.index[word]
    scores = model.unit @ model.unit[i]
    np.clip(scores, -1.0, 1.0, out=scores)
    scores[i] = -np.inf
    k = min(tau, len(model) - 1)
    if k == 0:
        return []
    idx = top_k_indices(scores[None, :], k)[0]
    return [SimilarityHit(model.words[j], float(scores[j])) for j in idx]
