"""Hot graph kernels: k-core peeling and Louvain local moving / aggregation.

Graphs are passed as CSR arrays (``indptr``, ``indices``, ``weights``) with
both directions of every undirected edge stored. Aggregated Louvain graphs may
carry self-loops; a self-loop entry ``(i, i)`` holds the full internal weight
of the community counted in both directions.
"""

import numpy as np

from ._numba import jit, use_numba


# ---------------------------------------------------------------------------
# k-core

@jit
def _core_numbers_bz(indptr, indices):
    # Batagelj & Zaversnik bucket peeling, O(m). Simple graphs only.
    n = indptr.shape[0] - 1
    deg = np.empty(n, np.int64)
    md = 0
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] > md:
            md = deg[v]
    bins = np.zeros(md + 1, np.int64)
    for v in range(n):
        bins[deg[v]] += 1
    start = 0
    for d in range(md + 1):
        num = bins[d]
        bins[d] = start
        start += num
    pos = np.empty(n, np.int64)
    vert = np.empty(n, np.int64)
    for v in range(n):
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(md, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0
    for i in range(n):
        v = vert[i]
        for p in range(indptr[v], indptr[v + 1]):
            u = indices[p]
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bins[du] += 1
                deg[u] -= 1
    return deg


def _core_numbers_numpy(indptr, indices):
    """Level-synchronous peeling: at level k drop every node of residual degree <= k."""
    n = indptr.shape[0] - 1
    deg = np.diff(indptr).astype(np.int64)
    core = np.zeros(n, np.int64)
    alive = np.ones(n, bool)
    src = np.repeat(np.arange(n), np.diff(indptr))
    remaining = n
    k = 0
    while remaining:
        while True:
            peel = alive & (deg <= k)
            cnt = int(peel.sum())
            if cnt == 0:
                break
            core[peel] = k
            alive[peel] = False
            remaining -= cnt
            hit = peel[src]
            deg -= np.bincount(indices[hit], minlength=n)
        k += 1
    return core


def core_numbers(indptr, indices):
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if use_numba():
        return _core_numbers_bz(indptr, indices)
    return _core_numbers_numpy(indptr, indices)


# ---------------------------------------------------------------------------
# Louvain

@jit
def _move_nodes(indptr, indices, weights, order, comm, resolution, tol):
    """One local-moving phase. ``comm`` is updated in place; returns True if any node moved.

    A node leaves its community only if the best neighbouring community raises
    modularity by more than ``tol``. Candidate ties keep the current community,
    then the first community met while scanning the (sorted) neighbour list.
    """
    n = indptr.shape[0] - 1
    k = np.zeros(n, np.float64)
    two_m = 0.0
    for i in range(n):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += weights[p]
        k[i] = s
        two_m += s
    if two_m <= 0.0:
        return False
    tot = np.zeros(n, np.float64)
    for i in range(n):
        tot[comm[i]] += k[i]
    w_to = np.zeros(n, np.float64)
    seen = np.zeros(n, np.bool_)
    cand = np.empty(n, np.int64)
    moved = False
    improved = True
    while improved:
        improved = False
        for idx in range(n):
            i = order[idx]
            ci = comm[i]
            nc = 0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                c = comm[j]
                if not seen[c]:
                    seen[c] = True
                    cand[nc] = c
                    nc += 1
                w_to[c] += weights[p]
            tot[ci] -= k[i]
            scale = resolution * k[i] / two_m
            stay = w_to[ci] - tot[ci] * scale
            best = stay
            best_c = ci
            for q in range(nc):
                c = cand[q]
                g = w_to[c] - tot[c] * scale
                if g > best:
                    best = g
                    best_c = c
            # modularity change of the move is (best - stay) / m
            if best_c != ci and (best - stay) * 2.0 / two_m > tol:
                comm[i] = best_c
                improved = True
                moved = True
            tot[comm[i]] += k[i]
            for q in range(nc):
                c = cand[q]
                seen[c] = False
                w_to[c] = 0.0
            w_to[ci] = 0.0
    return moved


@jit
def _renumber(comm):
    # contiguous ids in order of first appearance over node index
    n = comm.shape[0]
    remap = np.full(n, -1, np.int64)
    out = np.empty(n, np.int64)
    nxt = 0
    for i in range(n):
        c = comm[i]
        if remap[c] < 0:
            remap[c] = nxt
            nxt += 1
        out[i] = remap[c]
    return out, nxt


@jit
def _aggregate(indptr, indices, weights, comm, nc):
    n = indptr.shape[0] - 1
    nnz = indices.shape[0]
    keys = np.empty(nnz, np.int64)
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            keys[p] = comm[i] * nc + comm[indices[p]]
    order = np.argsort(keys, kind="mergesort")
    new_indptr = np.zeros(nc + 1, np.int64)
    new_indices = np.empty(nnz, np.int64)
    new_weights = np.empty(nnz, np.float64)
    cnt = 0
    last = -1
    for q in range(nnz):
        p = order[q]
        key = keys[p]
        if key != last:
            new_indices[cnt] = key % nc
            new_weights[cnt] = weights[p]
            new_indptr[key // nc + 1] += 1
            cnt += 1
            last = key
        else:
            new_weights[cnt - 1] += weights[p]
    for r in range(nc):
        new_indptr[r + 1] += new_indptr[r]
    return new_indptr, new_indices[:cnt].copy(), new_weights[:cnt].copy()


@jit
def _modularity_csr(indptr, indices, weights, comm, resolution):
    n = indptr.shape[0] - 1
    nc = 0
    for i in range(n):
        if comm[i] + 1 > nc:
            nc = comm[i] + 1
    inside = np.zeros(nc, np.float64)
    tot = np.zeros(nc, np.float64)
    two_m = 0.0
    for i in range(n):
        ci = comm[i]
        for p in range(indptr[i], indptr[i + 1]):
            w = weights[p]
            tot[ci] += w
            two_m += w
            if comm[indices[p]] == ci:
                inside[ci] += w
    if two_m <= 0.0:
        return 0.0
    q = 0.0
    for c in range(nc):
        share = tot[c] / two_m
        q += inside[c] / two_m - resolution * share * share
    return q


def _pick(fn):
    return fn if use_numba() else fn.py_func


def modularity_csr(indptr, indices, weights, comm, resolution=1.0):
    return float(_pick(_modularity_csr)(
        np.asarray(indptr, np.int64), np.asarray(indices, np.int64),
        np.asarray(weights, np.float64), np.asarray(comm, np.int64), float(resolution)))


def louvain_csr(indptr, indices, weights, seed, resolution=1.0, tol=1e-7, trace=None):
    """Multi-level Louvain on a CSR graph; returns contiguous community ids per node.

    Node visit order at every level is a permutation drawn from
    ``numpy.random.default_rng(seed)``, so the result is a pure function of the
    graph and the seed. If ``trace`` is a list, ``(level, q_before, q_after)``
    is appended for each local-moving phase (measured on that level's graph).
    """
    move = _pick(_move_nodes)
    renumber = _pick(_renumber)
    aggregate = _pick(_aggregate)

    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    n = indptr.shape[0] - 1
    rng = np.random.default_rng(seed)
    membership = np.arange(n, dtype=np.int64)
    level = 0
    while True:
        cur_n = indptr.shape[0] - 1
        comm = np.arange(cur_n, dtype=np.int64)
        order = rng.permutation(cur_n).astype(np.int64)
        if trace is not None:
            q0 = modularity_csr(indptr, indices, weights, comm, resolution)
        moved = move(indptr, indices, weights, order, comm, float(resolution), float(tol))
        comm, nc = renumber(comm)
        if trace is not None:
            trace.append((level, q0, modularity_csr(indptr, indices, weights, comm, resolution)))
        membership = comm[membership]
        if not moved or nc == cur_n:
            break
        indptr, indices, weights = aggregate(indptr, indices, weights, comm, nc)
        level += 1
    membership, _ = renumber(membership)
    return membership
