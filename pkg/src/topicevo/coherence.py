"""PMI topic coherence against an external 5-gram count corpus.

Count files hold tab-separated lines ``"w1 w2 w3 w4 w5<TAB>year<TAB>match_count<TAB>volume_count"``,
plain or gzip-compressed. Pair and word counts are weighted by ``match_count``;
the same total of scanned match counts normalises every probability.
"""

from __future__ import annotations

import gzip
import logging
import math
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

logger = logging.getLogger(__name__)


class CoherenceError(ValueError):
    pass


def pair_key(a, b):
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class WordPairSet:
    cluster: tuple
    words: tuple
    pairs: tuple


def make_word_pairs(cluster, words):
    """All unordered pairs of distinct words (45 for ten words)."""
    uniq = tuple(dict.fromkeys(w.lower() for w in words))
    return WordPairSet(cluster, uniq, tuple(pair_key(a, b) for a, b in combinations(uniq, 2)))


@dataclass
class NgramCounts:
    pair_counts: dict
    word_counts: dict
    total_windows: int = 0
    malformed: int = 0

    @classmethod
    def empty(cls, target_pairs, target_words):
        """Zero counts; both members of every target pair are tracked as words too."""
        pairs = {pair_key(*p): 0 for p in target_pairs}
        words = dict.fromkeys(sorted(set(target_words).union(*pairs)), 0)
        return cls(pairs, words)

    def targets(self):
        return frozenset(self.pair_counts), frozenset(self.word_counts)

    def merge(self, other):
        if self.targets() != other.targets():
            raise CoherenceError("cannot merge counts over different target sets")
        return NgramCounts(
            {p: c + other.pair_counts[p] for p, c in self.pair_counts.items()},
            {w: c + other.word_counts[w] for w, c in self.word_counts.items()},
            self.total_windows + other.total_windows,
            self.malformed + other.malformed,
        )

    def to_json(self):
        return {"pairs": {f"{a} {b}": c for (a, b), c in sorted(self.pair_counts.items())},
                "words": dict(sorted(self.word_counts.items())),
                "total_windows": self.total_windows, "malformed": self.malformed}

    @classmethod
    def from_json(cls, obj):
        pairs = {}
        for key, c in obj["pairs"].items():
            a, b = key.split(" ")
            pairs[pair_key(a, b)] = int(c)
        return cls(pairs, {w: int(c) for w, c in obj["words"].items()},
                   int(obj["total_windows"]), int(obj.get("malformed", 0)))


def count_lines(lines, target_pairs, target_words, year_range=None, n=5, counts=None):
    """Count one stream of 5-gram lines into ``counts`` (created if None)."""
    if counts is None:
        counts = NgramCounts.empty(target_pairs, target_words)
    pc, wc = counts.pair_counts, counts.word_counts
    words = frozenset(wc)
    total = 0
    bad = 0
    for line in lines:
        line = line.rstrip("\r\n")
        if not line:
            continue
        fields = line.split("\t")
        try:
            if len(fields) < 3:
                raise ValueError
            toks = fields[0].lower().split()
            if len(toks) != n:
                raise ValueError
            year = int(fields[1])
            match = int(fields[2])
            if match < 0:
                raise ValueError
        except ValueError:
            bad += 1
            continue
        if year_range is not None and not (year_range[0] <= year <= year_range[1]):
            continue
        total += match
        present = words.intersection(toks)
        if not present:
            continue
        for w in present:
            wc[w] += match
        if len(present) > 1:
            for a, b in combinations(sorted(present), 2):
                if (a, b) in pc:
                    pc[(a, b)] += match
    counts.total_windows += total
    counts.malformed += bad
    return counts


def _iter_range(path, start, end):
    with open(path, "rb") as fh:
        if start > 0:
            fh.seek(start - 1)
            fh.readline()  # finish the line that straddles the chunk edge
        while fh.tell() < end:
            raw = fh.readline()
            if not raw:
                break
            yield raw.decode("utf-8", errors="replace")


def _count_unit(unit, target_pairs, target_words, year_range):
    path, start, end = unit
    if start is None:
        opener = gzip.open if str(path).endswith(".gz") else open
        with opener(path, "rt", encoding="utf-8", errors="replace") as fh:
            return count_lines(fh, target_pairs, target_words, year_range)
    return count_lines(_iter_range(path, start, end), target_pairs, target_words, year_range)


def shard_units(paths, chunks_per_file=1):
    """Work units ``(path, start, end)``; uncompressed files are split into byte ranges."""
    units = []
    for p in paths:
        p = Path(p)
        if not p.is_file():
            raise CoherenceError(f"n-gram file not found: {p}")
        if p.suffix == ".gz" or chunks_per_file <= 1:
            units.append((str(p), None, None))
            continue
        size = p.stat().st_size
        step = max(1, -(-size // chunks_per_file))
        for start in range(0, size, step):
            units.append((str(p), start, min(size, start + step)))
    return units


def count_ngrams(paths, target_pairs, target_words, year_range=None, jobs=1, chunks_per_file=None):
    """Count target pairs and words over n-gram files, sharded across ``jobs`` processes.

    Every target pair's words are added to the word targets. Shards are
    merged in a fixed order; integer addition makes the result independent of
    how the input was split.
    """
    target_pairs = sorted({pair_key(*p) for p in target_pairs})
    target_words = sorted(set(target_words) | {w for p in target_pairs for w in p})
    if chunks_per_file is None:
        chunks_per_file = jobs
    units = shard_units(paths, chunks_per_file)
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_count_unit, units, [target_pairs] * len(units),
                                  [target_words] * len(units), [year_range] * len(units)))
    else:
        parts = [_count_unit(u, target_pairs, target_words, year_range) for u in units]
    return aggregate_counts(parts) if parts else NgramCounts.empty(target_pairs, target_words)


def aggregate_counts(shards):
    """Field-wise sum of shard counts over identical target sets."""
    shards = list(shards)
    if not shards:
        raise CoherenceError("nothing to aggregate")
    out = shards[0]
    for s in shards[1:]:
        out = out.merge(s)
    if len(shards) == 1:
        out = out.merge(NgramCounts.empty(out.pair_counts, out.word_counts))
    return out


def pmi(counts, w_i, w_j):
    """Natural-log PMI, or None when the pair (or either word) never occurs."""
    if counts.total_windows <= 0:
        raise CoherenceError("no scanned n-grams: total_windows is zero")
    w_i, w_j = w_i.lower(), w_j.lower()
    c_ij = counts.pair_counts.get(pair_key(w_i, w_j), 0)
    c_i = counts.word_counts.get(w_i, 0)
    c_j = counts.word_counts.get(w_j, 0)
    if c_ij == 0 or c_i == 0 or c_j == 0:
        return None
    n = counts.total_windows
    return math.log((c_ij / n) / ((c_i / n) * (c_j / n)))


@dataclass
class PmiResult:
    cluster: tuple
    words: tuple
    pmi_values: list = field(default_factory=list)
    score: float | None = None  # median
    mean: float | None = None
    coverage: float = 0.0
    n_pairs: int = 0

    def to_json(self):
        return {"cluster": list(self.cluster), "words": list(self.words),
                "pmi_values": self.pmi_values, "score": self.score, "mean": self.mean,
                "coverage": self.coverage, "n_pairs": self.n_pairs}


def pmi_score(counts, pair_set):
    """Median PMI over the pairs that co-occur; ``score`` is None when none do."""
    values = []
    for a, b in pair_set.pairs:
        v = pmi(counts, a, b)
        if v is not None:
            values.append(v)
    n_pairs = len(pair_set.pairs)
    res = PmiResult(pair_set.cluster, pair_set.words, values, n_pairs=n_pairs,
                    coverage=len(values) / n_pairs if n_pairs else 0.0)
    if values:
        res.score = statistics.median(values)
        res.mean = math.fsum(values) / len(values)
    return res


def select_random_clusters(clusters, n, seed, min_size=1):
    """Uniform sample of ``n`` cluster keys among those with at least ``min_size`` words."""
    eligible = sorted(k for k, words in clusters.items() if len(words) >= min_size)
    if n > len(eligible):
        raise CoherenceError(f"asked for {n} clusters but only {len(eligible)} have >= {min_size} words")
    return sorted(random.Random(seed).sample(eligible, n))

