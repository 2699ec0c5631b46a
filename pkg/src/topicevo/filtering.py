"""Topic importance levels and series-aware cluster filtering."""

from __future__ import annotations

from dataclasses import dataclass


class FilterError(ValueError):
    pass


@dataclass(frozen=True)
class FilterConfig:
    gamma: float  # centrality threshold
    theta_cf: float  # cluster-frequency threshold
    alpha: int  # cluster-size threshold
    delta: float | None = None  # optional density threshold

    def __post_init__(self):
        _check_threshold("gamma", self.gamma)
        _check_threshold("theta_cf", self.theta_cf)
        if self.delta is not None:
            _check_threshold("delta", self.delta)


@dataclass(frozen=True)
class FilterDecision:
    cluster: tuple
    kept: bool
    reason: str


def _check_threshold(name, value):
    if not 0.0 <= value <= 0.9:
        raise FilterError(f"{name} must lie in [0, 0.9], got {value}")


def importance_level(metrics, gamma, theta_cf):
    """Quadrant 1-4 of the (centrality, cluster frequency) plane; thresholds are strict."""
    _check_threshold("gamma", gamma)
    _check_threshold("theta_cf", theta_cf)
    central = metrics.centrality > gamma
    frequent = metrics.cluster_frequency > theta_cf
    return 1 + int(frequent) + 2 * int(central)


def _passes(m, cfg):
    ok = m.centrality > cfg.gamma and m.cluster_frequency > cfg.theta_cf
    if cfg.delta is not None:
        ok = ok and m.density > cfg.delta
    return ok


def is_cluster_usable(cluster, series_steps, metrics, cfg):
    """Keep a cluster larger than ``alpha`` if it, or any step of its series, passes the thresholds.

    ``metrics`` maps ``(t, id)`` to :class:`~topicevo.network.ClusterMetrics`.
    """
    try:
        m = metrics[cluster]
    except KeyError:
        raise FilterError(f"no metrics for cluster {cluster}") from None
    if m.size <= cfg.alpha:
        return FilterDecision(cluster, False, f"size {m.size} <= alpha {cfg.alpha}")
    if _passes(m, cfg):
        return FilterDecision(cluster, True, f"passes thresholds at t={cluster[0]}")
    for step in series_steps:
        step = tuple(step)
        if step not in metrics:
            raise FilterError(f"no metrics for series member {step}")
        if _passes(metrics[step], cfg):
            return FilterDecision(cluster, True, f"series passes thresholds at t={step[0]}")
    return FilterDecision(cluster, False, "never passes thresholds in its series")


def filter_clusters(metrics, series, cfg):
    """Split all clusters into kept and skipped, with per-cluster reasons and levels.

    ``series`` is an iterable of step lists (or objects with ``.steps``).
    """
    step_lists = [list(map(tuple, getattr(s, "steps", s))) for s in series]
    series_of = {}
    for steps in step_lists:
        for st in steps:
            series_of[st] = steps
    kept, skipped, reasons, levels = [], [], {}, {}
    for key in sorted(metrics):
        dec = is_cluster_usable(key, series_of.get(key, [key]), metrics, cfg)
        (kept if dec.kept else skipped).append(key)
        reasons[key] = dec.reason
        levels[key] = importance_level(metrics[key], cfg.gamma, cfg.theta_cf)
    return {"kept": kept, "skipped": skipped, "reasons": reasons, "levels": levels}


def filtered_to_json(result):
    def k(key):
        return f"{key[0]},{key[1]}"
    return {
        "kept": [list(x) for x in result["kept"]],
        "skipped": [list(x) for x in result["skipped"]],
        "reasons": {k(key): v for key, v in result["reasons"].items()},
        "levels": {k(key): v for key, v in result["levels"].items()},
    }
