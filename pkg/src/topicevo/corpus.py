"""Corpus ingestion, snapshot partitioning, term counts and per-snapshot TF-IDF."""

from __future__ import annotations

import bisect
import csv
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

logger = logging.getLogger(__name__)

INPUT_FORMATS = ("jsonl", "csv")

_SPLIT = re.compile(r"[^0-9a-z]+")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Document:
    id: str
    timestamp: int
    tokens: tuple


@dataclass
class LoadReport:
    dropped_empty: int = 0
    skipped_malformed: list = field(default_factory=list)  # (line_number, message)


@dataclass
class Snapshot:
    index: int
    time_range: tuple  # [start, end) in epoch seconds
    documents: list

    @property
    def total_tokens(self):
        return sum(len(d.tokens) for d in self.documents)


@dataclass
class PartitionReport:
    dropped_out_of_range: int = 0


@dataclass(frozen=True)
class TermStats:
    snapshot_index: int
    counts: dict
    total_tokens: int

    def to_json(self):
        return {"snapshot": self.snapshot_index, "counts": self.counts,
                "total_tokens": self.total_tokens}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["snapshot"]), {k: int(v) for k, v in obj["counts"].items()},
                   int(obj["total_tokens"]))


@dataclass(frozen=True)
class TfidfTable:
    snapshot_index: int
    values: dict
    mean: float

    def to_json(self):
        return {"snapshot": self.snapshot_index, "values": self.values, "mean": self.mean}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["snapshot"]), {k: float(v) for k, v in obj["values"].items()},
                   float(obj["mean"]))


def tokenize(text, stopwords=None):
    """Lowercase, split on non-alphanumerics, drop numbers and 1-char tokens."""
    out = []
    for tok in _SPLIT.split(text.lower()):
        if len(tok) < 2 or tok.isdigit():
            continue
        if stopwords and tok in stopwords:
            continue
        out.append(tok)
    return out


def parse_timestamp(value):
    """Integer epoch seconds, or an ISO-8601 date/datetime (naive values are UTC)."""
    if isinstance(value, bool):
        raise CorpusError(f"bad timestamp {value!r}")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise CorpusError(f"non-finite timestamp {value!r}")
        return int(value)
    s = str(value).strip()
    if re.fullmatch(r"[+-]?\d+", s):
        return int(s)
    try:
        dt = datetime.fromisoformat(s.replace("Z", "+00:00"))
    except ValueError as exc:
        raise CorpusError(f"unparseable timestamp {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def year_start(year):
    return int(datetime(year, 1, 1, tzinfo=timezone.utc).timestamp())


def timestamp_year(ts):
    return datetime.fromtimestamp(ts, tz=timezone.utc).year


def _records(path, fmt):
    # yields (line_number, record-or-exception)
    if fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    if not isinstance(rec, dict):
                        raise ValueError("record is not an object")
                    yield lineno, rec
                except ValueError as exc:
                    yield lineno, exc
    elif fmt == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"id", "timestamp", "text"} - set(reader.fieldnames or ())
            if missing:
                raise CorpusError(f"{path}: CSV header lacks {sorted(missing)}")
            for rec in reader:
                # header is line 1
                yield reader.line_num, rec
    else:
        raise CorpusError(f"unknown input format {fmt!r}; expected one of {INPUT_FORMATS}")


def load_corpus(path, fmt="jsonl", skip_malformed=False, stopwords=None, report=None):
    """Read documents from a JSON-lines or CSV corpus file.

    Documents whose text yields no tokens are dropped and counted in
    ``report.dropped_empty``. A malformed record raises :class:`CorpusError`
    naming its line, unless ``skip_malformed`` is set, in which case it is
    recorded in ``report.skipped_malformed``.
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"corpus file not found: {path}")
    report = report if report is not None else LoadReport()
    docs = []
    for lineno, rec in _records(path, fmt):
        try:
            if isinstance(rec, Exception):
                raise CorpusError(str(rec))
            for key in ("id", "timestamp", "text"):
                if rec.get(key) is None:
                    raise CorpusError(f"missing field {key!r}")
            ts = parse_timestamp(rec["timestamp"])
            text = rec["text"]
            if not isinstance(text, str):
                raise CorpusError("text is not a string")
        except CorpusError as exc:
            if not skip_malformed:
                raise CorpusError(f"{path}:{lineno}: malformed record: {exc}") from None
            report.skipped_malformed.append((lineno, str(exc)))
            continue
        tokens = tokenize(text, stopwords)
        if not tokens:
            report.dropped_empty += 1
            continue
        docs.append(Document(str(rec["id"]), ts, tuple(tokens)))
    if report.dropped_empty or report.skipped_malformed:
        logger.info("%s: dropped %d empty, skipped %d malformed", path,
                    report.dropped_empty, len(report.skipped_malformed))
    return docs


def snapshot_boundaries(documents, width_years=None, start_year=None, boundaries=None):
    """Return the strictly increasing list of interval edges (epoch seconds).

    Either ``boundaries`` (timestamps or year numbers / ISO dates) is given, or
    fixed ``width_years`` windows starting at ``start_year`` (default: year of
    the earliest document) and extending past the latest document.
    """
    if boundaries is not None:
        edges = []
        for b in boundaries:
            if isinstance(b, int) and not isinstance(b, bool) and 0 < b < 10000:
                edges.append(year_start(b))
            else:
                edges.append(parse_timestamp(b))
        if len(edges) < 2:
            raise CorpusError("snapshot boundary list needs at least two edges")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise CorpusError("snapshot boundaries must be strictly increasing")
        return edges
    if not width_years or width_years < 1:
        raise CorpusError("empty snapshot layout: give a year width or a boundary list")
    if not documents:
        raise CorpusError("no documents to partition")
    first = min(d.timestamp for d in documents)
    last = max(d.timestamp for d in documents)
    year = start_year if start_year is not None else timestamp_year(first)
    edges = [year_start(year)]
    while edges[-1] <= last:
        year += width_years
        edges.append(year_start(year))
    return edges


def partition_snapshots(documents, edges, report=None):
    """Assign each document to the half-open interval ``[edges[i], edges[i+1])``.

    Out-of-range documents are dropped and counted. Documents inside a snapshot
    keep their input order.
    """
    if len(edges) < 2:
        raise CorpusError("empty snapshot layout")
    report = report if report is not None else PartitionReport()
    buckets = [[] for _ in range(len(edges) - 1)]
    for doc in documents:
        pos = bisect.bisect_right(edges, doc.timestamp) - 1
        if 0 <= pos < len(buckets):
            buckets[pos].append(doc)
        else:
            report.dropped_out_of_range += 1
    if documents and report.dropped_out_of_range == len(documents):
        raise CorpusError("all documents fall outside the snapshot range")
    return [Snapshot(i, (edges[i], edges[i + 1]), docs) for i, docs in enumerate(buckets)]


def term_frequencies(snapshot):
    if not snapshot.documents:
        raise CorpusError(f"snapshot {snapshot.index} is empty")
    counts = Counter()
    for doc in snapshot.documents:
        counts.update(doc.tokens)
    return TermStats(snapshot.index, dict(sorted(counts.items())), sum(counts.values()))


def compute_tfidf(all_term_stats: Iterable[TermStats]):
    """TF-IDF with each snapshot treated as one pseudo-document.

    tf = count / snapshot tokens, idf = ln(T / df) over the T snapshots. The
    table mean runs over the words present in that snapshot.
    """
    stats = list(all_term_stats)
    if not stats:
        raise CorpusError("need at least one snapshot of term statistics")
    n_snap = len(stats)
    df = Counter()
    for st in stats:
        if st.total_tokens <= 0:
            raise CorpusError(f"snapshot {st.snapshot_index} has no tokens")
        df.update(st.counts.keys())
    tables = []
    for st in stats:
        values = {}
        for w in sorted(st.counts):
            values[w] = (st.counts[w] / st.total_tokens) * math.log(n_snap / df[w])
        mean = math.fsum(values.values()) / len(values) if values else 0.0
        tables.append(TfidfTable(st.snapshot_index, values, mean))
    return tables
