import gzip
import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from oracles import count_oracle, median, pmi_formula
from topicevo.coherence import (CoherenceError, NgramCounts, aggregate_counts, count_lines,
                                count_ngrams, make_word_pairs, pmi, pmi_score,
                                select_random_clusters)

LINE = "robot arm control system design\t2005\t7\t3"


def test_hand_counted_line():
    c = count_lines([LINE], [("robot", "system")], ["robot", "system"])
    assert c.pair_counts == {("robot", "system"): 7}
    assert c.word_counts == {"robot": 7, "system": 7}
    assert c.total_windows == 7


def test_line_without_targets_only_grows_total():
    c = count_lines(["a b c d e\t2000\t4\t1"], [("robot", "system")], ["robot", "system"])
    assert c.pair_counts[("robot", "system")] == 0 and c.total_windows == 4


def test_case_and_order_insensitive():
    base = count_lines([LINE], [("robot", "system")], ["robot", "system", "arm"])
    shuffled = count_lines(["DESIGN System control ARM Robot\t2005\t7\t3"],
                           [("system", "robot")], ["robot", "system", "arm"])
    assert shuffled == base


def test_malformed_lines_are_counted_and_skipped():
    lines = ["too few\t2000\t1\t1", "a b c d e\tyear\t1\t1", "a b c d e\t2000", LINE, ""]
    c = count_lines(lines, [("robot", "system")], ["robot"])
    assert c.malformed == 3 and c.total_windows == 7


def test_year_filter():
    lines = [LINE, "robot x y z system\t1990\t5\t1"]
    c = count_lines(lines, [("robot", "system")], [], year_range=(2000, 2010))
    assert c.pair_counts[("robot", "system")] == 7 and c.total_windows == 7


def test_pmi_examples():
    ind = NgramCounts({("a", "b"): 1}, {"a": 10, "b": 10}, 100)
    assert pmi(ind, "a", "b") == pytest.approx(0.0, abs=1e-15)
    c = NgramCounts({("a", "b"): 20}, {"a": 20, "b": 50}, 100)
    assert pmi(c, "a", "b") == pytest.approx(math.log(2), abs=1e-15)
    assert pmi(c, "b", "a") == pmi(c, "a", "b")
    assert pmi(NgramCounts({("a", "b"): 0}, {"a": 3, "b": 3}, 10), "a", "b") is None
    with pytest.raises(CoherenceError):
        pmi(NgramCounts({}, {}, 0), "a", "b")


def scores(values):
    words = [f"w{i}" for i in range(len(values) + 1)]
    pairs = {("w0", f"w{i + 1}"): 1 for i in range(len(values))}
    return words, pairs


def test_median_rule():
    # build counts whose PMIs are exactly ln of chosen ratios, then check the median rule
    for ratios, want in (([1, 2, 3], 2), ([1, 2, 3, 10], 2.5)):
        n = 1000
        words = {"w0": 10}
        pairs = {}
        for i, r in enumerate(ratios, 1):
            words[f"w{i}"] = 10
            pairs[("w0", f"w{i}")] = r
        c = NgramCounts(pairs, words, n)
        ps = make_word_pairs((0, 0), list(words))
        res = pmi_score(c, ps)
        vals = sorted(math.log(r * n / 100) for r in ratios)
        assert res.score == pytest.approx(median(vals), abs=1e-12)
        assert res.n_pairs == len(ps.pairs) and res.coverage == len(ratios) / len(ps.pairs)
    assert median([1, 2, 3]) == 2 and median([1, 2, 3, 10]) == 2.5


def test_no_defined_pairs_gives_no_score():
    c = NgramCounts({("a", "b"): 0}, {"a": 1, "b": 1}, 5)
    res = pmi_score(c, make_word_pairs((1, 2), ["a", "b"]))
    assert res.score is None and res.coverage == 0.0 and res.pmi_values == []


def test_word_pairs():
    ps = make_word_pairs((0, 1), [f"w{i}" for i in range(10)])
    assert len(ps.pairs) == 45 and all(a < b for a, b in ps.pairs)
    assert make_word_pairs((0, 1), ["A", "a", "b"]).pairs == (("a", "b"),)


def fixture_lines(seed, n_lines, vocab_size=40):
    rng = random.Random(seed)
    vocab = [f"v{i}" for i in range(vocab_size)]
    lines = []
    for _ in range(n_lines):
        toks = [rng.choice(vocab) for _ in range(5)]
        toks = [t.upper() if rng.random() < 0.1 else t for t in toks]
        lines.append(f"{' '.join(toks)}\t{rng.randint(1990, 2010)}\t{rng.randint(1, 9)}\t1")
    return lines, vocab


def test_counts_and_pmi_match_formula_script(tmp_path):
    lines, vocab = fixture_lines(0, 3000)
    words = vocab[:10]
    ps = make_word_pairs((0, 0), words)
    path = tmp_path / "f.tsv"
    path.write_text("\n".join(lines) + "\n")
    c = count_ngrams([path], ps.pairs, ps.words)
    pc, wc, total = count_oracle(lines, ps.pairs, words)
    assert c.total_windows == total
    assert c.word_counts == {w: wc[w] for w in words}
    assert c.pair_counts == {p: pc[p] for p in ps.pairs}
    expected = []
    for a, b in ps.pairs:
        if pc[(a, b)]:
            v = pmi_formula(pc[(a, b)], wc[a], wc[b], total)
            assert pmi(c, a, b) == pytest.approx(v, abs=1e-12)
            expected.append(v)
    res = pmi_score(c, ps)
    assert res.score == pytest.approx(median(expected), abs=1e-12)


def test_every_split_merges_to_the_same_counts(tmp_path):
    lines, vocab = fixture_lines(1, 10_000)
    ps = make_word_pairs((0, 0), vocab[:10])
    whole = count_lines(lines, ps.pairs, ps.words)
    rng = random.Random(3)
    for k in (2, 3, 4):
        for _ in range(5):
            cuts = sorted(rng.sample(range(1, len(lines)), k - 1))
            bounds = [0] + cuts + [len(lines)]
            shards = [count_lines(lines[a:b], ps.pairs, ps.words) for a, b in zip(bounds, bounds[1:])]
            assert aggregate_counts(shards) == whole
            assert aggregate_counts(shards[::-1]) == whole
            # regrouping: merge the tail first
            tail = aggregate_counts(shards[1:])
            assert aggregate_counts([shards[0], tail]) == whole


def test_file_sharding_and_gzip(tmp_path):
    lines, vocab = fixture_lines(2, 4000)
    ps = make_word_pairs((0, 0), vocab[:8])
    whole = count_lines(lines, ps.pairs, ps.words)
    plain = tmp_path / "a.tsv"
    plain.write_text("\n".join(lines[:2500]) + "\n")
    gz = tmp_path / "b.tsv.gz"
    with gzip.open(gz, "wt") as fh:
        fh.write("\n".join(lines[2500:]) + "\n")
    for chunks in (1, 3, 7):
        assert count_ngrams([plain, gz], ps.pairs, ps.words, chunks_per_file=chunks) == whole
    assert count_ngrams([plain, gz], ps.pairs, ps.words, jobs=2) == whole
    with pytest.raises(CoherenceError):
        count_ngrams([tmp_path / "missing.tsv"], ps.pairs, ps.words)


def test_merge_rejects_mismatched_targets():
    a = NgramCounts.empty([("a", "b")], ["a", "b"])
    b = NgramCounts.empty([("a", "c")], ["a", "c"])
    with pytest.raises(CoherenceError):
        aggregate_counts([a, b])
    with pytest.raises(CoherenceError):
        aggregate_counts([])


def test_single_shard_identity():
    c = NgramCounts({("a", "b"): 2}, {"a": 3, "b": 4}, 9, 1)
    assert aggregate_counts([c]) == c


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.lists(st.sampled_from(["a", "b", "c", "d", "x", "y"]),
                                   min_size=5, max_size=5),
                          st.integers(0, 20)), max_size=30))
def test_count_invariants(rows):
    lines = [f"{' '.join(t)}\t2000\t{m}\t1" for t, m in rows]
    c = count_lines(lines, [("a", "b"), ("a", "c"), ("c", "d")], ["a", "b", "c", "d"])
    for (p, q), n in c.pair_counts.items():
        assert 0 <= n <= min(c.word_counts[p], c.word_counts[q])
    assert c.total_windows == sum(m for _, m in rows)


def test_counts_json_roundtrip():
    c = NgramCounts({("a", "b"): 2}, {"a": 3, "b": 4}, 9, 1)
    assert NgramCounts.from_json(c.to_json()) == c


def test_random_cluster_selection():
    clusters = {(0, i): ["w"] * (i % 3 + 1) for i in range(12)}
    eligible = [k for k, v in clusters.items() if len(v) >= 2]
    assert select_random_clusters(clusters, len(eligible), 1, min_size=2) == sorted(eligible)
    assert select_random_clusters(clusters, 3, 5) == select_random_clusters(clusters, 3, 5)
    with pytest.raises(CoherenceError):
        select_random_clusters(clusters, 13, 0)


def test_random_cluster_selection_is_uniform():
    clusters = {(0, i): ["w"] for i in range(10)}
    trials, n = 10_000, 3
    freq = Counter()
    for seed in range(trials):
        freq.update(select_random_clusters(clusters, n, seed))
    p = n / len(clusters)
    sigma = math.sqrt(trials * p * (1 - p))
    for key in clusters:
        assert abs(freq[key] - trials * p) <= 3 * sigma
