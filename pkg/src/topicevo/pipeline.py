"""Stage-by-stage orchestration over an output directory.

Every stage reads the artifacts of earlier stages from ``cfg.out`` and writes
its own, so any stage can be rerun on its own. Snapshot-scoped stages fan out
to a process pool of ``cfg.jobs`` workers; each artifact has a single writer.
"""

from __future__ import annotations

import logging
import platform
import random
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__, _numba
from .coherence import (count_ngrams, make_word_pairs, pmi_score, select_random_clusters)
from .community import Partition, louvain
from .corpus import (LoadReport, PartitionReport, TermStats, TfidfTable, compute_tfidf,
                     load_corpus, partition_snapshots, snapshot_boundaries, term_frequencies)
from .embeddings import load_embeddings
from .evolution import (attach_events, build_time_series, events_to_json, label_events,
                        similarity_matrix)
from .filtering import FilterConfig, filter_clusters, filtered_to_json, importance_level
from .io import read_json, write_json
from .network import (ClusterMetrics, SemanticNetwork, build_network, cluster_centrality,
                      cluster_frequency, density)
from .reduction import reduce_words

logger = logging.getLogger(__name__)

STAGES = ("ingest", "network", "cluster", "similarity", "reduction_filtering", "coherence")
EMBEDDING_NAMES = ("{t}.vec", "{t}.txt", "{t}.vec.gz", "{t}.txt.gz")


class PipelineError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# timing

class Timings:
    """Per-unit stage timings, persisted to ``timings.json``."""

    def __init__(self, out, cfg=None):
        self.path = Path(out) / "timings.json"
        self.data = read_json(self.path) if self.path.exists() else {"records": [], "stage_wall": {}}
        if cfg is not None:
            self.data["execution"] = {"jobs": cfg.jobs, "parallel": cfg.parallel,
                                      "backend": _numba.backend_name()}

    def reset(self, stage):
        self.data["records"] = [r for r in self.data["records"] if r["stage"] != stage]
        self.data["stage_wall"].pop(stage, None)

    def add(self, stage, unit, millis):
        self.data["records"].append({"stage": stage, "snapshot": unit, "wall_millis": float(millis)})

    @contextmanager
    def stage(self, name, extend=False):
        """Time a stage; ``extend`` adds to the stage's records instead of replacing them."""
        if not extend:
            self.reset(name)
        t0 = time.perf_counter()
        yield self
        prior = self.data["stage_wall"].get(name, 0.0) if extend else 0.0
        self.data["stage_wall"][name] = prior + (time.perf_counter() - t0) * 1000.0
        self.save()

    def save(self):
        write_json(self.path, self.data)


def _timed(fn, *args):
    t0 = time.perf_counter()
    res = fn(*args)
    return res, (time.perf_counter() - t0) * 1000.0


def _fan_out(fn, arg_list, jobs):
    """Run ``fn(*args)`` for each args tuple, in order; returns (result, millis) pairs."""
    if jobs > 1 and len(arg_list) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(arg_list))) as pool:
            futures = [pool.submit(_timed, fn, *a) for a in arg_list]
            return [f.result() for f in futures]
    return [_timed(fn, *a) for a in arg_list]


# ---------------------------------------------------------------------------
# artifact access

def snap_dir(out, t):
    return Path(out) / str(t)


def n_snapshots(out):
    path = Path(out) / "snapshots.json"
    if not path.exists():
        raise PipelineError(f"missing {path}; run the ingest stage first")
    return len(read_json(path)["snapshots"])


def _require(path, stage):
    if not Path(path).exists():
        raise PipelineError(f"missing artifact {path}; run the {stage} stage first")
    return read_json(path)


def load_term_stats(out, t):
    return TermStats.from_json(_require(snap_dir(out, t) / "termstats.json", "ingest"))


def load_tfidf(out, t):
    return TfidfTable.from_json(_require(snap_dir(out, t) / "tfidf.json", "stats"))


def load_network(out, t):
    return SemanticNetwork.from_json(_require(snap_dir(out, t) / "network.json", "network"), t)


def load_partition(out, t):
    return Partition.from_json(_require(snap_dir(out, t) / "clusters.json", "cluster"), t)


def load_clusters(out, t):
    obj = _require(snap_dir(out, t) / "clusters.json", "cluster")
    return {int(c): words for c, words in obj["clusters"].items()}


def load_metrics(out, t):
    obj = _require(snap_dir(out, t) / "metrics.json", "filter")
    return {(t, int(c)): ClusterMetrics.from_json(m) for c, m in obj.items()}


def update_meta(out, **sections):
    path = Path(out) / "meta.json"
    meta = read_json(path) if path.exists() else {}
    meta.update(sections)
    write_json(path, meta)


def write_run_meta(cfg):
    update_meta(cfg.out, config=cfg.analysis_params(), seed=cfg.seed, versions={
        "topicevo": __version__, "numpy": np.__version__,
        "python": platform.python_version(),
    })


def find_embedding_file(directory, t):
    for pattern in EMBEDDING_NAMES:
        p = Path(directory) / pattern.format(t=t)
        if p.exists():
            return p
    raise PipelineError(f"missing embeddings for snapshot {t} in {directory} "
                        f"(tried {', '.join(n.format(t=t) for n in EMBEDDING_NAMES)})")


# ---------------------------------------------------------------------------
# stages

def _read_stopwords(path):
    if not path:
        return None
    return {w.strip().lower() for w in Path(path).read_text(encoding="utf-8").split() if w.strip()}


def stage_ingest(cfg, timings):
    if not cfg.corpus:
        raise PipelineError("ingest needs a corpus path")
    with timings.stage("ingest"):
        t0 = time.perf_counter()
        load_report = LoadReport()
        docs = load_corpus(cfg.corpus, cfg.corpus_format, cfg.skip_malformed,
                           _read_stopwords(cfg.stopwords), load_report)
        edges = snapshot_boundaries(docs, cfg.snapshot_years, cfg.snapshot_start,
                                    cfg.snapshot_boundaries)
        part_report = PartitionReport()
        snaps = partition_snapshots(docs, edges, part_report)
        stats = []
        for snap in snaps:
            try:
                stats.append(term_frequencies(snap))
            except ValueError as exc:
                raise PipelineError(f"stage ingest failed for snapshot {snap.index}: {exc}") from exc
        for st in stats:
            write_json(snap_dir(cfg.out, st.snapshot_index) / "termstats.json", st.to_json())
        write_json(Path(cfg.out) / "snapshots.json", {
            "snapshots": [{"index": s.index, "start": s.time_range[0], "end": s.time_range[1],
                           "documents": len(s.documents), "total_tokens": s.total_tokens}
                          for s in snaps],
            "dropped_empty": load_report.dropped_empty,
            "skipped_malformed": [list(x) for x in load_report.skipped_malformed],
            "dropped_out_of_range": part_report.dropped_out_of_range,
        })
        _write_tfidf(cfg.out, stats)
        timings.add("ingest", "global", (time.perf_counter() - t0) * 1000.0)
    return stats


def _write_tfidf(out, stats):
    for table in compute_tfidf(stats):
        write_json(snap_dir(out, table.snapshot_index) / "tfidf.json", table.to_json())


def stage_stats(cfg, timings=None):
    """Recompute TF-IDF tables from existing term statistics."""
    stats = [load_term_stats(cfg.out, t) for t in range(n_snapshots(cfg.out))]
    _write_tfidf(cfg.out, stats)


def _network_worker(out, t, emb_path, phi, tau):
    model = load_embeddings(emb_path, snapshot_index=t)
    net = build_network(model, phi, tau)
    write_json(snap_dir(out, t) / "network.json", net.to_json())
    return {"dimension": model.dimension, "vocabulary": len(model),
            "nodes": net.n_nodes, "edges": net.n_edges}


def stage_network(cfg, timings):
    if not cfg.embeddings:
        raise PipelineError("network stage needs an embeddings directory")
    n = n_snapshots(cfg.out)
    paths = [find_embedding_file(cfg.embeddings, t) for t in range(n)]
    with timings.stage("network"):
        results = _run_per_snapshot("network", _network_worker,
                                    [(cfg.out, t, str(paths[t]), cfg.phi, cfg.tau) for t in range(n)],
                                    cfg.jobs, timings)
    update_meta(cfg.out, networks={str(t): r for t, r in enumerate(results)})
    return results


def _cluster_worker(out, t, seed, resolution, weighted):
    net = load_network(out, t)
    if net.n_nodes == 0:
        part = Partition(t, {}, 0.0)
    else:
        part = louvain(net, seed, resolution=resolution, weighted=weighted)
    write_json(snap_dir(out, t) / "clusters.json", part.to_json())
    return len(part.clusters())


def stage_cluster(cfg, timings):
    n = n_snapshots(cfg.out)
    with timings.stage("cluster"):
        # per-snapshot seed = master seed + snapshot index
        return _run_per_snapshot("cluster", _cluster_worker,
                                 [(cfg.out, t, cfg.seed + t, cfg.resolution, not cfg.unweighted)
                                  for t in range(n)], cfg.jobs, timings)


def _run_per_snapshot(stage, fn, arg_list, jobs, timings):
    try:
        results = _fan_out(fn, arg_list, jobs)
    except PipelineError:
        raise
    except Exception as exc:
        # find the failing snapshot by rerunning sequentially
        for args in arg_list:
            try:
                fn(*args)
            except Exception as inner:
                raise PipelineError(f"stage {stage} failed for snapshot {args[1]}: {inner}") from inner
        raise PipelineError(f"stage {stage} failed: {exc}") from exc
    out = []
    for t, (res, ms) in enumerate(results):
        timings.add(stage, t, ms)
        out.append(res)
    return out


def stage_similarity(cfg, timings):
    n = n_snapshots(cfg.out)
    with timings.stage("similarity"):
        clusters = [load_clusters(cfg.out, t) for t in range(n)]
        for t in range(n - 1):
            t0 = time.perf_counter()
            mat = similarity_matrix(clusters[t], clusters[t + 1])
            write_json(Path(cfg.out) / "sim" / f"{t}_{t + 1}.json",
                       {f"{i},{j}": s for (i, j), s in mat.items()})
            timings.add("similarity", t, (time.perf_counter() - t0) * 1000.0)


def load_matrices(out, n):
    mats = []
    for t in range(n - 1):
        obj = _require(Path(out) / "sim" / f"{t}_{t + 1}.json", "similarity")
        mats.append({tuple(int(x) for x in k.split(",")): float(v) for k, v in obj.items()})
    return mats


def _series_and_events(cfg):
    n = n_snapshots(cfg.out)
    clusters = [load_clusters(cfg.out, t) for t in range(n)]
    mats = load_matrices(cfg.out, n)
    series = build_time_series(clusters, mats)
    transitions = label_events(mats, clusters, cfg.theta_match, cfg.phi_inst)
    attach_events(series, transitions)
    return clusters, series, transitions


def stage_timeseries(cfg, timings):
    with timings.stage("similarity", extend=True):
        t0 = time.perf_counter()
        _, series, _ = _series_and_events(cfg)
        write_json(Path(cfg.out) / "timeseries.json", [s.to_json() for s in series])
        timings.add("similarity", "global", (time.perf_counter() - t0) * 1000.0)
    return series


def stage_events(cfg, timings):
    with timings.stage("similarity", extend=True):
        t0 = time.perf_counter()
        clusters, _, transitions = _series_and_events(cfg)
        write_json(Path(cfg.out) / "events.json", events_to_json(transitions, clusters))
        timings.add("similarity", "global", (time.perf_counter() - t0) * 1000.0)
    return transitions


def load_series(out):
    return [s["steps"] for s in _require(Path(out) / "timeseries.json", "timeseries")]


def compute_metrics(cfg):
    n = n_snapshots(cfg.out)
    clusters = {}
    nets = {}
    for t in range(n):
        nets[t] = load_network(cfg.out, t)
        for c, words in load_clusters(cfg.out, t).items():
            clusters[(t, c)] = words
    stats = {t: load_term_stats(cfg.out, t) for t in range(n)}
    cf = cluster_frequency(clusters, stats)
    metrics = {}
    for key, words in clusters.items():
        net = nets[key[0]]
        metrics[key] = ClusterMetrics(len(words), cluster_centrality(net, words),
                                      density(net, words), cf[key])
    return metrics


def filter_config(cfg):
    return FilterConfig(cfg.gamma, cfg.theta_cf, cfg.alpha, cfg.delta)


def stage_filter(cfg, timings):
    n = n_snapshots(cfg.out)
    fcfg = filter_config(cfg)
    with timings.stage("reduction_filtering"):
        t0 = time.perf_counter()
        metrics = compute_metrics(cfg)
        for t in range(n):
            write_json(snap_dir(cfg.out, t) / "metrics.json", {
                str(c): {**m.to_json(), "level": importance_level(m, fcfg.gamma, fcfg.theta_cf)}
                for (tt, c), m in metrics.items() if tt == t})
        result = filter_clusters(metrics, load_series(cfg.out), fcfg)
        write_json(Path(cfg.out) / "filtered.json", filtered_to_json(result))
        timings.add("reduction_filtering", "global", (time.perf_counter() - t0) * 1000.0)
    return result


def _reduce_worker(out, t, cluster_ids, k):
    net = load_network(out, t)
    tfidf = load_tfidf(out, t)
    clusters = load_clusters(out, t)
    for c in cluster_ids:
        sub = net.subgraph(clusters[c])
        reduced = reduce_words(sub, k, tfidf, (t, c))
        write_json(Path(out) / "reduced" / str(t) / f"{c}.json", reduced.to_json())
    return len(cluster_ids)


def stage_reduce(cfg, timings):
    n = n_snapshots(cfg.out)
    if cfg.reduce_all:
        targets = {t: sorted(load_clusters(cfg.out, t)) for t in range(n)}
    else:
        kept = _require(Path(cfg.out) / "filtered.json", "filter")["kept"]
        targets = {t: [] for t in range(n)}
        for t, c in kept:
            targets[t].append(c)
    shutil.rmtree(Path(cfg.out) / "reduced", ignore_errors=True)
    # reduce shares the reduction_filtering bucket with filter
    with timings.stage("reduction_filtering", extend=True):
        _run_per_snapshot("reduction_filtering", _reduce_worker,
                          [(cfg.out, t, sorted(targets[t]), cfg.core_k) for t in range(n)],
                          cfg.jobs, timings)


def load_reduced(out):
    root = Path(out) / "reduced"
    found = {}
    if not root.exists():
        return found
    for tdir in sorted(root.iterdir(), key=lambda p: int(p.name)):
        for f in sorted(tdir.glob("*.json"), key=lambda p: int(p.stem)):
            found[(int(tdir.name), int(f.stem))] = read_json(f)
    return found


def pmi_candidates(cfg):
    """Cluster key -> candidate top-N word list for coherence scoring."""
    if cfg.pmi_source == "reduced":
        return {key: [w["word"] for w in obj["kept"]][:cfg.pmi_top_n]
                for key, obj in load_reduced(cfg.out).items()}
    out = {}
    for t in range(n_snapshots(cfg.out)):
        for c, words in load_clusters(cfg.out, t).items():
            # unranked baseline: a seeded arbitrary choice of words
            pick = list(words)
            random.Random(f"{cfg.seed}:{t}:{c}").shuffle(pick)
            out[(t, c)] = pick[:cfg.pmi_top_n]
    return out


def ngram_files(directory):
    files = sorted(p for p in Path(directory).iterdir()
                   if p.is_file() and not p.name.startswith("."))
    if not files:
        raise PipelineError(f"no n-gram files in {directory}")
    return files


def stage_pmi(cfg, timings):
    if not cfg.ngrams:
        raise PipelineError("pmi stage needs an n-gram directory")
    with timings.stage("coherence"):
        t0 = time.perf_counter()
        cands = pmi_candidates(cfg)
        eligible = {k: v for k, v in cands.items() if len(v) >= cfg.pmi_min_size}
        n = min(cfg.pmi_clusters, len(eligible))
        if n < cfg.pmi_clusters:
            logger.warning("only %d clusters eligible for PMI scoring (asked for %d)", n, cfg.pmi_clusters)
        chosen = select_random_clusters(eligible, n, cfg.seed, cfg.pmi_min_size)
        pair_sets = [make_word_pairs(k, eligible[k]) for k in chosen]
        year_range = None
        if cfg.ngram_year_min is not None or cfg.ngram_year_max is not None:
            year_range = (cfg.ngram_year_min if cfg.ngram_year_min is not None else -10**9,
                          cfg.ngram_year_max if cfg.ngram_year_max is not None else 10**9)
        counts = count_ngrams(ngram_files(cfg.ngrams),
                              [p for ps in pair_sets for p in ps.pairs],
                              [w for ps in pair_sets for w in ps.words],
                              year_range=year_range, jobs=cfg.jobs, chunks_per_file=1)
        write_json(Path(cfg.out) / "counts.json", counts.to_json())
        results = [pmi_score(counts, ps) for ps in pair_sets] if counts.total_windows else []
        write_json(Path(cfg.out) / "pmi.json", [r.to_json() for r in results])
        timings.add("coherence", "global", (time.perf_counter() - t0) * 1000.0)
    return results


def run_pipeline(cfg):
    """Run every stage in order; coherence runs only when an n-gram directory is set."""
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for stale in ("timings.json", "meta.json"):
        (out / stale).unlink(missing_ok=True)
    timings = Timings(out, cfg)
    timings.data["started"] = time.time()
    t_all = time.perf_counter()
    write_run_meta(cfg)
    stage_ingest(cfg, timings)
    stage_network(cfg, timings)
    stage_cluster(cfg, timings)
    stage_similarity(cfg, timings)
    stage_timeseries(cfg, timings)
    stage_events(cfg, timings)
    stage_filter(cfg, timings)
    stage_reduce(cfg, timings)
    if cfg.ngrams:
        stage_pmi(cfg, timings)
    timings.data["total_wall_millis"] = (time.perf_counter() - t_all) * 1000.0
    timings.save()
    return out


# ---------------------------------------------------------------------------
# queries over a finished run

def trace_keywords(run_dir, keywords):
    """For each keyword, ``{snapshot: [cluster ids containing it]}`` (case-insensitive)."""
    n = n_snapshots(run_dir)
    wanted = {k.lower(): k for k in keywords}
    result = {k: {} for k in keywords}
    for t in range(n):
        for c, words in sorted(load_clusters(run_dir, t).items()):
            lowered = {w.lower() for w in words}
            for low, orig in wanted.items():
                if low in lowered:
                    result[orig].setdefault(t, []).append(c)
    return result


def report_timings(run_dir):
    """Per-stage totals, per-snapshot breakdown, and summed vs wall time per stage."""
    path = Path(run_dir) / "timings.json"
    data = _require(path, "pipeline")
    stages = {}
    for rec in data["records"]:
        st = stages.setdefault(rec["stage"], {"total_millis": 0.0, "per_snapshot": {}})
        st["total_millis"] += rec["wall_millis"]
        key = str(rec["snapshot"])
        st["per_snapshot"][key] = st["per_snapshot"].get(key, 0.0) + rec["wall_millis"]
    for name, st in stages.items():
        st["wall_millis"] = data.get("stage_wall", {}).get(name)
    return {"stages": stages, "execution": data.get("execution", {}),
            "total_wall_millis": data.get("total_wall_millis")}


def format_timings(report):
    lines = [f"{'stage':<22}{'sum ms':>12}{'wall ms':>12}  per snapshot"]
    order = [s for s in STAGES if s in report["stages"]]
    order += [s for s in report["stages"] if s not in order]
    for name in order:
        st = report["stages"][name]
        per = ", ".join(f"{k}:{v:.1f}" for k, v in st["per_snapshot"].items())
        wall = st["wall_millis"]
        lines.append(f"{name:<22}{st['total_millis']:>12.1f}{(wall if wall is not None else float('nan')):>12.1f}  {per}")
    if report.get("total_wall_millis") is not None:
        lines.append(f"{'total wall':<22}{'':>12}{report['total_wall_millis']:>12.1f}")
    return "\n".join(lines)
