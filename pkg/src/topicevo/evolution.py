"""Topic matching across snapshots, greedy time-series chaining and event labels."""

from __future__ import annotations

from dataclasses import dataclass, field

EVENT_KINDS = ("Grow", "Survive", "Contract", "Split", "Merge", "Die", "Birth")


class EvolutionError(ValueError):
    pass


@dataclass(frozen=True)
class EventLabel:
    kind: str
    instability: float | None = None
    matches: tuple = ()  # successor (or, for Merge, predecessor) cluster ids above the threshold

    def to_json(self):
        return {"kind": self.kind, "instability": self.instability, "matches": list(self.matches)}


@dataclass
class Transition:
    """Labels for one step t -> t+1.

    ``source`` has one label per cluster at t (Die/Split/Grow/Survive/Contract);
    ``target`` holds only the clusters at t+1 that are born or are merge points.
    """
    t: int
    source: dict = field(default_factory=dict)
    target: dict = field(default_factory=dict)


@dataclass
class TopicTimeSeries:
    series_id: str
    steps: list  # [(t, cluster_id), ...]
    step_similarities: list
    events: list = field(default_factory=list)  # EventLabel | None per step
    merged_into: tuple | None = None  # step absorbed by another series
    absorbed: list = field(default_factory=list)  # steps of other series ending into this one

    def to_json(self):
        return {
            "id": self.series_id,
            "steps": [list(s) for s in self.steps],
            "similarities": self.step_similarities,
            "events": [e.to_json() if e is not None else None for e in self.events],
            "merged_into": list(self.merged_into) if self.merged_into else None,
            "absorbed": [list(s) for s in self.absorbed],
        }


def cluster_similarity(a, b):
    a, b = set(a), set(b)
    if not a or not b:
        raise EvolutionError("cluster similarity of an empty word set")
    inter = len(a & b)
    return min(inter / len(a), inter / len(b))


def similarity_matrix(clusters_t, clusters_next):
    """Sparse ``{(i, j): sim}`` over cluster pairs sharing at least one word."""
    owner = {}
    for j, words in clusters_next.items():
        for w in words:
            owner[w] = j
    sizes_next = {j: len(set(ws)) for j, ws in clusters_next.items()}
    out = {}
    for i in sorted(clusters_t):
        words = set(clusters_t[i])
        if not words:
            raise EvolutionError(f"cluster {i} is empty")
        inter = {}
        for w in words:
            j = owner.get(w)
            if j is not None:
                inter[j] = inter.get(j, 0) + 1
        for j in sorted(inter):
            n = inter[j]
            out[(i, j)] = min(n / len(words), n / sizes_next[j])
    return out


def instability(n_t, n_next):
    if n_t < 1:
        raise EvolutionError("instability needs a non-empty predecessor")
    return n_next / n_t - 1.0


def _successors(matrix):
    # argmax over nonzero entries per row, ties -> lowest successor id
    best = {}
    for (i, j), s in sorted(matrix.items()):
        if s <= 0:
            continue
        if i not in best or s > best[i][1]:
            best[i] = (j, s)
    return best


def build_time_series(partitions, matrices):
    """Chain clusters through their most similar successor.

    ``partitions[t]`` maps cluster id -> words and ``matrices[t]`` is the
    similarity matrix for ``t -> t+1``. A cluster's predecessor is the cluster
    with the highest similarity among those whose best successor it is (ties
    to the lowest id). Series follow predecessor/successor pairs, so each
    cluster sits in exactly one series; a series whose best successor was
    claimed by a stronger predecessor ends there and records ``merged_into``.
    """
    n_snap = len(partitions)
    if len(matrices) != max(n_snap - 1, 0):
        raise EvolutionError(f"need {max(n_snap - 1, 0)} similarity matrices, got {len(matrices)}")
    nxt = {}
    prev = {}
    for t in range(n_snap - 1):
        succ = _successors(matrices[t])
        claim = {}
        for i, (j, s) in sorted(succ.items()):
            nxt[(t, i)] = ((t + 1, j), s)
            if j not in claim or s > claim[j][1]:
                claim[j] = (i, s)
        for j, (i, s) in claim.items():
            prev[(t + 1, j)] = (t, i)

    series = []
    by_step = {}
    for t in range(n_snap):
        for cid in sorted(partitions[t]):
            if (t, cid) in prev:
                continue
            steps, sims = [(t, cid)], []
            ts = TopicTimeSeries(f"ts{len(series):05d}", steps, sims)
            cur = (t, cid)
            while cur in nxt:
                succ, s = nxt[cur]
                if prev.get(succ) != cur:
                    ts.merged_into = succ
                    break
                steps.append(succ)
                sims.append(s)
                cur = succ
            series.append(ts)
            for st in steps:
                by_step[st] = ts
    for ts in series:
        if ts.merged_into is not None:
            by_step[ts.merged_into].absorbed.append(ts.steps[-1])
    return series


def label_events(matrices, partitions, theta_match, phi_inst):
    """Event labels for every transition.

    For cluster i at t with ``M = {j : sim(i, j) > theta_match}``: empty M is
    Die, ``|M| > 1`` is Split, otherwise the unique match's instability gives
    Contract (< -phi_inst), Grow (> phi_inst) or Survive. Clusters at t+1
    matched by more than one predecessor get Merge; those matched by none get
    Birth.
    """
    if not 0.0 <= theta_match <= 1.0:
        raise EvolutionError(f"theta_match must lie in [0, 1], got {theta_match}")
    if not phi_inst > 0:
        raise EvolutionError(f"instability threshold must be positive, got {phi_inst}")
    out = []
    for t, matrix in enumerate(matrices):
        cur, nxt = partitions[t], partitions[t + 1]
        above = {}
        back = {}
        for (i, j), s in matrix.items():
            if s > theta_match:
                above.setdefault(i, []).append((j, s))
                back.setdefault(j, []).append(i)
        tr = Transition(t)
        for i in sorted(cur):
            matches = sorted(above.get(i, []))
            if not matches:
                tr.source[i] = EventLabel("Die")
                continue
            # best match: highest similarity, ties to the lowest id
            best_j = min(matches, key=lambda m: (-m[1], m[0]))[0]
            inst = instability(len(cur[i]), len(nxt[best_j]))
            ids = tuple(j for j, _ in matches)
            if len(matches) > 1:
                kind = "Split"
            elif inst < -phi_inst:
                kind = "Contract"
            elif inst > phi_inst:
                kind = "Grow"
            else:
                kind = "Survive"
            tr.source[i] = EventLabel(kind, inst, ids)
        for j in sorted(nxt):
            preds = sorted(back.get(j, []))
            if not preds:
                tr.target[j] = EventLabel("Birth")
            elif len(preds) > 1:
                tr.target[j] = EventLabel("Merge", None, tuple(preds))
        out.append(tr)
    return out


def attach_events(series, transitions):
    """Fill ``series.events`` with the outgoing label of each step (None at the last snapshot)."""
    by_t = {tr.t: tr for tr in transitions}
    for ts in series:
        ts.events = [by_t[t].source.get(cid) if t in by_t else None for t, cid in ts.steps]
    return series


def events_to_json(transitions, partitions):
    """``{t: {cluster_id: {...}}}`` with the outgoing label and any incoming Birth/Merge."""
    out = {}
    incoming = {}
    for tr in transitions:
        for j, lab in tr.target.items():
            incoming[(tr.t + 1, j)] = lab
    by_t = {tr.t: tr for tr in transitions}
    for t, clusters in enumerate(partitions):
        row = {}
        for cid in sorted(clusters):
            lab = by_t[t].source.get(cid) if t in by_t else None
            inc = incoming.get((t, cid))
            row[str(cid)] = {
                "kind": lab.kind if lab else None,
                "instability": lab.instability if lab else None,
                "matches": list(lab.matches) if lab else [],
                "incoming": inc.kind if inc else None,
                "predecessors": list(inc.matches) if inc else [],
            }
        out[str(t)] = row
    return out
