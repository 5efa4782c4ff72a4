"""Pure-numpy fallbacks for the hot kernels.

Loops run over the short axis (coordinates, grid levels); the long axis
(points, positions) is vectorised.  Integer outputs match ``_numba`` exactly.
"""
import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from ._consts import (
    CAUCHY_CLAMP,
    GOLDEN,
    M1,
    M2,
    MERSENNE61,
    ODD,
    U_EPS,
    LANE2,
)

_U = np.uint64
_P61 = int(MERSENNE61)


def mix(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U(30))) * M1
        z = (z ^ (z >> _U(27))) * M2
        return z ^ (z >> _U(31))


def _mulmod61(a, b):
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    with np.errstate(over="ignore"):
        a_hi, a_lo = a >> _U(31), a & _U((1 << 31) - 1)
        b_hi, b_lo = b >> _U(31), b & _U((1 << 31) - 1)
        mid = a_hi * b_lo + a_lo * b_hi
        r = ((a_hi * b_hi) << _U(1)) + (mid >> _U(30)) + ((mid & _U((1 << 30) - 1)) << _U(31)) + a_lo * b_lo
        r = (r & MERSENNE61) + (r >> _U(61))
        r = (r & MERSENNE61) + (r >> _U(61))
        return np.where(r >= MERSENNE61, r - MERSENNE61, r)


def _cauchy(z):
    u = ((z >> _U(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)
    u = np.clip(u, U_EPS, 1.0 - U_EPS)
    return np.clip(np.tan(np.pi * (u - 0.5)), -CAUCHY_CLAMP, CAUCHY_CLAMP)


def edit_distance(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        return max(n, m)
    ramp = np.arange(m + 1, dtype=np.int64)
    prev = ramp.copy()
    t = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        diag = prev[:-1] + (b != a[i - 1])
        np.minimum(diag, prev[1:] + 1, out=t[1:])
        t[0] = i
        # left-to-right insertions: cur[j] = min_k (t[k] + j - k)
        prev = np.minimum.accumulate(t - ramp) + ramp
    return int(prev[m])


def banded_edit_distance(a, b, band):
    d = edit_distance(a, b)
    return d if d <= band else band + 1


def substring_keys(symbols, m, base1, base2):
    syms = [int(v) + 1 for v in np.asarray(symbols)]
    n = len(syms)
    out = []
    for base in (int(base1), int(base2)):
        h = [0] * (n + 1)
        for i, v in enumerate(syms):
            h[i + 1] = (h[i] * base + v) % _P61
        h = np.array([v for v in h], dtype=np.uint64)
        pw = _U(pow(base, m, _P61))
        sub = h[m:] + MERSENNE61 - _mulmod61(h[: n - m + 1], pw)
        out.append(np.where(sub >= MERSENNE61, sub - MERSENNE61, sub))
    with np.errstate(over="ignore"):
        return mix(out[0] ^ mix(out[1] + GOLDEN))


def hash_bits(keys, dim, seed):
    keys = np.asarray(keys, dtype=np.uint64)
    out = np.empty((keys.shape[0], dim), dtype=np.int8)
    with np.errstate(over="ignore"):
        for w in range((dim + 63) // 64):
            z = mix(keys ^ mix(_U(seed) + _U(w + 1) * GOLDEN))
            for c in range(w * 64, min(dim, (w + 1) * 64)):
                out[:, c] = ((z >> _U(c - w * 64)) & _U(1)).astype(np.int8)
    return out


def _cell_pair(Q, unit, nblk, lstep, positions, shifts, inv_r, seeds, g):
    nsrc, _, t = Q.shape
    npos = positions.shape[0]
    h1 = np.full(npos, seeds[g], dtype=np.uint64)
    h2 = np.full(npos, mix(_U(seeds[g]) ^ LANE2), dtype=np.uint64)
    scale = unit * inv_r[g]
    idx = 0
    with np.errstate(over="ignore"):
        for j in range(nblk):
            block = Q[:, positions + j * lstep, :]
            for s in range(nsrc):
                for c in range(t):
                    x = block[s, :, c].astype(np.float64)
                    cell = np.floor(x * scale + shifts[g, idx]).astype(np.int64).astype(np.uint64)
                    h1 = mix(h1 ^ cell)
                    h2 = mix(h2 + cell * ODD)
                    idx += 1
    return h1, h2


def grid_cells(Q, unit, nblk, lstep, positions, shifts, inv_r, seeds):
    positions = np.asarray(positions, dtype=np.int64)
    ng = inv_r.shape[0]
    o1 = np.empty((positions.shape[0], ng), dtype=np.uint64)
    o2 = np.empty_like(o1)
    for g in range(ng):
        o1[:, g], o2[:, g] = _cell_pair(Q, unit, nblk, lstep, positions, shifts, inv_r, seeds, g)
    return o1, o2


def _columns(base, k):
    with np.errstate(over="ignore"):
        steps = (np.arange(1, k + 1, dtype=np.uint64) * GOLDEN)[None, :]
        return _cauchy(mix(base[:, None] + steps))


def cauchy_columns(h1, h2, colkey, k):
    h1 = np.asarray(h1, dtype=np.uint64)
    h2 = np.asarray(h2, dtype=np.uint64)
    base = mix(mix(_U(colkey) ^ h1) ^ h2)
    return _columns(base, k)


def singleton_sketches(Q, unit, nblk, lstep, positions, shifts, inv_r, seeds, values, colkey, k):
    positions = np.asarray(positions, dtype=np.int64)
    out = np.zeros((positions.shape[0], k), dtype=np.float64)
    for g in range(inv_r.shape[0]):
        a, b = _cell_pair(Q, unit, nblk, lstep, positions, shifts, inv_r, seeds, g)
        out += values[g] * cauchy_columns(a, b, colkey, k)
    return out


def sliding_sums(S, s, resync):
    # per resync block: a from-scratch first window, then cumulative differences
    S = np.asarray(S, dtype=np.float64)
    cnt = S.shape[0] - s + 1
    out = np.empty((cnt, S.shape[1]), dtype=np.float64)
    for start in range(0, cnt, resync):
        stop = min(cnt, start + resync)
        first = S[start:start + s].sum(axis=0)
        delta = S[start + s:stop + s - 1] - S[start:stop - 1]
        out[start] = first
        if stop - start > 1:
            out[start + 1:stop] = first + np.cumsum(delta, axis=0)
    return out


def forest_keys(X, shifts, width, seed):
    X = np.asarray(X)
    h = np.full(X.shape[0], seed, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for j in range(X.shape[1]):
            cell = np.floor((X[:, j].astype(np.float64) + shifts[j]) / width)
            h = mix(h ^ cell.astype(np.int64).astype(np.uint64))
    return h


def multi_source_dijkstra(indptr, indices, weights, sources):
    nv = indptr.shape[0] - 1
    graph = scipy.sparse.csr_matrix((weights, indices, indptr), shape=(nv, nv))
    return scipy.sparse.csgraph.dijkstra(graph, directed=True, indices=np.asarray(sources), min_only=True)
