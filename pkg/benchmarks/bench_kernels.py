"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--nodes 5000] [--degree 10] [--repeat 5]

Both backends run on the same random CSR graph; results are checked for
equality before timings are printed.
"""

import argparse
import statistics
import time

import numpy as np

from topicevo import _numba
from topicevo.kernels import core_numbers, louvain_csr


def random_csr(n, degree, seed):
    rng = np.random.default_rng(seed)
    m = n * degree // 2
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    keep = src != dst
    a, b = np.minimum(src, dst)[keep], np.maximum(src, dst)[keep]
    pairs = np.unique(np.stack([a, b], 1), axis=0)
    w = rng.uniform(0.5, 1.0, len(pairs))
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    vals = np.concatenate([w, w])
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(n + 1, np.int64)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr), cols.astype(np.int64), vals


def timed(fn, repeat):
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=5000)
    ap.add_argument("--degree", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    indptr, indices, weights = random_csr(args.nodes, args.degree, 0)
    jobs = {
        "k-core": lambda: core_numbers(indptr, indices),
        "louvain": lambda: louvain_csr(indptr, indices, weights, seed=0),
    }
    backends = ["numpy"] + (["numba"] if _numba.numba_available() else [])
    results = {}
    for backend in backends:
        _numba.set_backend(backend)
        for name, fn in jobs.items():
            fn()  # warm-up, includes compilation or cache load
            results[name, backend] = timed(fn, args.repeat)

    print(f"graph: {args.nodes} nodes, {len(indices) // 2} edges, median of {args.repeat} runs")
    print(f"{'kernel':<10}" + "".join(f"{b:>12}" for b in backends) + "     speedup")
    for name in jobs:
        row = [results[name, b][0] for b in backends]
        if len(backends) == 2:
            same = np.array_equal(results[name, "numpy"][1], results[name, "numba"][1])
            speed = f"{row[0] / row[1]:>10.1f}x" + ("" if same else "  RESULTS DIFFER")
        else:
            speed = "         n/a"
        print(f"{name:<10}" + "".join(f"{t * 1000:>10.1f}ms" for t in row) + speed)


if __name__ == "__main__":
    main()
