"""Time each hot kernel under the numba and the pure-numpy backend.

    python benchmarks/bench_backends.py [--scale 1.0] [--full 2048]

``--full n`` also times one end-to-end estimate per backend in a fresh
interpreter (the backend is fixed at import through EDAPPROX_NUMBA).
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from edapprox._kernels import _numba, _numpy


def _time(fn, *args, repeat=3):
    fn(*args)  # compile / warm caches
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(scale):
    rng = np.random.default_rng(0)
    n_str = int(1500 * scale)
    a = rng.integers(0, 2, n_str).astype(np.int32)
    b = rng.integers(0, 2, n_str).astype(np.int32)
    z = rng.integers(0, 2, int(20000 * scale)).astype(np.int32)
    keys = rng.integers(0, 2 ** 63, int(20000 * scale)).astype(np.uint64)
    P = int(4000 * scale)
    Q = rng.integers(-50, 50, (3, P + 8 * 16, 16)).astype(np.int32)
    pos = np.arange(P, dtype=np.int64)
    G = 6
    dim = 8 * 3 * 16
    shifts = rng.random((G, dim))
    inv_r = 1.0 / 2.0 ** np.arange(G)
    seeds = rng.integers(0, 2 ** 63, G).astype(np.uint64)
    values = np.ones(G)
    S = rng.standard_normal((int(50000 * scale), 32))
    X = rng.integers(-10 ** 6, 10 ** 6, (int(20000 * scale), 32))
    xs = rng.random(32) * 1024
    nv = int(50000 * scale)
    u = rng.integers(0, nv, 4 * nv)
    v = rng.integers(0, nv, 4 * nv)
    w = rng.random(4 * nv)
    src = np.concatenate([u, v, np.arange(nv - 1)])
    dst = np.concatenate([v, u, np.arange(1, nv)])
    wt = np.concatenate([w, w, np.ones(nv - 1)])
    order = np.argsort(src, kind="stable")
    indptr = np.zeros(nv + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=nv), out=indptr[1:])
    indices, weights = dst[order].astype(np.int64), wt[order]
    sources = rng.choice(nv, 64, replace=False).astype(np.int64)
    return {
        "edit_distance": lambda k: k.edit_distance(a, b),
        "banded_edit_distance": lambda k: k.banded_edit_distance(a, b, 64),
        "substring_keys": lambda k: k.substring_keys(z, 64, np.uint64(12345), np.uint64(67891)),
        "hash_bits": lambda k: k.hash_bits(keys, 64, np.uint64(7)),
        "singleton_sketches": lambda k: k.singleton_sketches(Q, 0.5, 8, 16, pos, shifts, inv_r, seeds,
                                                            values, np.uint64(3), 32),
        "sliding_sums": lambda k: k.sliding_sums(S, 64, 1 << 16),
        "forest_keys": lambda k: k.forest_keys(X, xs, 1024.0, np.uint64(5)),
        "multi_source_dijkstra": lambda k: k.multi_source_dijkstra(indptr, indices, weights, sources),
    }


def full_run(n):
    code = ("import time;from edapprox.bench import planted_pair;from edapprox import estimate_edit_distance;"
            f"x,y=planted_pair({n},{max(1, n // 16)},0);estimate_edit_distance(x,y,seed=0);"
            "t=time.perf_counter();estimate_edit_distance(x,y,seed=1);print(time.perf_counter()-t)")
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, EDAPPROX_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out["numba" if flag == "1" else "numpy"] = float(res.stdout.strip().splitlines()[-1])
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--full", type=int, default=0, help="also time one estimate of this length")
    args = ap.parse_args()
    print(f"{'kernel':24s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, call in cases(args.scale).items():
        tn = _time(call, _numba)
        tp = _time(call, _numpy, repeat=1)
        print(f"{name:24s} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f}")
    if args.full:
        t = full_run(args.full)
        print(f"{'estimate n=' + str(args.full):24s} {t['numba']:10.4f} {t['numpy']:10.4f} "
              f"{t['numpy'] / t['numba']:8.1f}")


if __name__ == "__main__":
    main()
