"""numba implementations of the hot kernels (see package docstring)."""
import math

import numba
import numpy as np

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

_jit = numba.njit(cache=True, nogil=True)

_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S61 = np.uint64(61)
_S63 = np.uint64(63)
_ONE = np.uint64(1)
_MASK30 = np.uint64((1 << 30) - 1)
_MASK31 = np.uint64((1 << 31) - 1)
_INV53 = 1.0 / 9007199254740992.0


@_jit
def mix(z):
    z = (z ^ (z >> _S30)) * M1
    z = (z ^ (z >> _S27)) * M2
    return z ^ (z >> _S31)


@_jit
def _mulmod61(a, b):
    a_hi = a >> _S31
    a_lo = a & _MASK31
    b_hi = b >> _S31
    b_lo = b & _MASK31
    mid = a_hi * b_lo + a_lo * b_hi
    r = (a_hi * b_hi << _ONE) + (mid >> np.uint64(30)) + ((mid & _MASK30) << _S31) + a_lo * b_lo
    r = (r & MERSENNE61) + (r >> _S61)
    r = (r & MERSENNE61) + (r >> _S61)
    if r >= MERSENNE61:
        r -= MERSENNE61
    return r


@_jit
def _to_unit(z):
    u = (np.float64(z >> _S11) + 0.5) * _INV53
    if u < U_EPS:
        u = U_EPS
    elif u > 1.0 - U_EPS:
        u = 1.0 - U_EPS
    return u


@_jit
def _cauchy(z):
    c = math.tan(math.pi * (_to_unit(z) - 0.5))
    if c > CAUCHY_CLAMP:
        return CAUCHY_CLAMP
    if c < -CAUCHY_CLAMP:
        return -CAUCHY_CLAMP
    return c


@_jit
def edit_distance(a, b):
    n = a.shape[0]
    m = b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1).astype(np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            up = prev[j] + 1
            if up < best:
                best = up
            left = cur[j - 1] + 1
            if left < best:
                best = left
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@_jit
def banded_edit_distance(a, b, band):
    # exact whenever the true distance is <= band
    n = a.shape[0]
    m = b.shape[0]
    if abs(n - m) > band:
        return band + 1
    big = n + m + 1
    w = 2 * band + 1
    prev = np.full(w, big, dtype=np.int64)
    cur = np.full(w, big, dtype=np.int64)
    # slot d holds column j = i + d - band
    for d in range(band, w):
        j = d - band
        if j <= m:
            prev[d] = j
    for i in range(1, n + 1):
        for d in range(w):
            cur[d] = big
            j = i + d - band
            if j < 0 or j > m:
                continue
            if j == 0:
                cur[d] = i
                continue
            best = prev[d] + (0 if a[i - 1] == b[j - 1] else 1)
            if d + 1 < w and prev[d + 1] + 1 < best:
                best = prev[d + 1] + 1
            if d > 0 and cur[d - 1] + 1 < best:
                best = cur[d - 1] + 1
            cur[d] = best
        prev, cur = cur, prev
    r = prev[m - n + band]
    return r if r <= band else band + 1


@_jit
def _prefix_hash(symbols, base):
    n = symbols.shape[0]
    h = np.zeros(n + 1, dtype=np.uint64)
    for i in range(n):
        h[i + 1] = _mulmod61(h[i], base) + np.uint64(symbols[i] + 1)
        if h[i + 1] >= MERSENNE61:
            h[i + 1] -= MERSENNE61
    return h


@_jit
def _powmod61(base, e):
    r = np.uint64(1)
    b = base
    while e > 0:
        if e & 1:
            r = _mulmod61(r, b)
        b = _mulmod61(b, b)
        e >>= 1
    return r


@_jit
def substring_keys(symbols, m, base1, base2):
    n = symbols.shape[0]
    cnt = n - m + 1
    out = np.empty(cnt, dtype=np.uint64)
    h1 = _prefix_hash(symbols, base1)
    h2 = _prefix_hash(symbols, base2)
    p1 = _powmod61(base1, m)
    p2 = _powmod61(base2, m)
    for i in range(cnt):
        a = h1[i + m] + MERSENNE61 - _mulmod61(h1[i], p1)
        if a >= MERSENNE61:
            a -= MERSENNE61
        b = h2[i + m] + MERSENNE61 - _mulmod61(h2[i], p2)
        if b >= MERSENNE61:
            b -= MERSENNE61
        out[i] = mix(a ^ mix(b + GOLDEN))
    return out


@_jit
def hash_bits(keys, dim, seed):
    cnt = keys.shape[0]
    out = np.empty((cnt, dim), dtype=np.int8)
    words = (dim + 63) // 64
    for i in range(cnt):
        for w in range(words):
            z = mix(keys[i] ^ mix(seed + np.uint64(w + 1) * GOLDEN))
            for c in range(w * 64, min(dim, (w + 1) * 64)):
                out[i, c] = np.int8((z >> np.uint64(c - w * 64)) & _ONE)
    return out


@_jit
def _cell_pair(Q, unit, nblk, lstep, pos, shifts, inv_r, seeds, g):
    nsrc = Q.shape[0]
    t = Q.shape[2]
    h1 = seeds[g]
    h2 = mix(seeds[g] ^ LANE2)
    scale = unit * inv_r[g]
    idx = 0
    for j in range(nblk):
        row = pos + j * lstep
        for s in range(nsrc):
            for c in range(t):
                cell = np.uint64(np.int64(math.floor(Q[s, row, c] * scale + shifts[g, idx])))
                h1 = mix(h1 ^ cell)
                h2 = mix(h2 + cell * ODD)
                idx += 1
    return h1, h2


@_jit
def grid_cells(Q, unit, nblk, lstep, positions, shifts, inv_r, seeds):
    npos = positions.shape[0]
    ng = inv_r.shape[0]
    o1 = np.empty((npos, ng), dtype=np.uint64)
    o2 = np.empty((npos, ng), dtype=np.uint64)
    for p in range(npos):
        for g in range(ng):
            a, b = _cell_pair(Q, unit, nblk, lstep, positions[p], shifts, inv_r, seeds, g)
            o1[p, g] = a
            o2[p, g] = b
    return o1, o2


@_jit
def _column_base(colkey, h1, h2):
    return mix(mix(colkey ^ h1) ^ h2)


@_jit
def cauchy_columns(h1, h2, colkey, k):
    n = h1.shape[0]
    out = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        base = _column_base(colkey, h1[i], h2[i])
        for j in range(k):
            out[i, j] = _cauchy(mix(base + np.uint64(j + 1) * GOLDEN))
    return out


@_jit
def singleton_sketches(Q, unit, nblk, lstep, positions, shifts, inv_r, seeds, values, colkey, k):
    npos = positions.shape[0]
    ng = inv_r.shape[0]
    out = np.zeros((npos, k), dtype=np.float64)
    for p in range(npos):
        for g in range(ng):
            a, b = _cell_pair(Q, unit, nblk, lstep, positions[p], shifts, inv_r, seeds, g)
            base = _column_base(colkey, a, b)
            v = values[g]
            for j in range(k):
                out[p, j] += v * _cauchy(mix(base + np.uint64(j + 1) * GOLDEN))
    return out


@_jit
def sliding_sums(S, s, resync):
    P = S.shape[0]
    k = S.shape[1]
    cnt = P - s + 1
    out = np.empty((cnt, k), dtype=np.float64)
    q = np.zeros(k, dtype=np.float64)
    for i in range(cnt):
        if i % resync == 0:
            q[:] = 0.0
            for r in range(i, i + s):
                for j in range(k):
                    q[j] += S[r, j]
        else:
            for j in range(k):
                q[j] = q[j] + S[i + s - 1, j] - S[i - 1, j]
        out[i, :] = q
    return out


@_jit
def forest_keys(X, shifts, width, seed):
    n = X.shape[0]
    k = X.shape[1]
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        h = seed
        for j in range(k):
            cell = np.uint64(np.int64(math.floor((X[i, j] + shifts[j]) / width)))
            h = mix(h ^ cell)
        out[i] = h
    return out


@_jit
def _heap_push(hd, hv, size, d, v):
    i = size
    hd[i] = d
    hv[i] = v
    while i > 0:
        parent = (i - 1) >> 1
        if hd[parent] <= hd[i]:
            break
        hd[parent], hd[i] = hd[i], hd[parent]
        hv[parent], hv[i] = hv[i], hv[parent]
        i = parent
    return size + 1


@_jit
def _heap_pop(hd, hv, size):
    d = hd[0]
    v = hv[0]
    size -= 1
    hd[0] = hd[size]
    hv[0] = hv[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        small = left
        if left + 1 < size and hd[left + 1] < hd[left]:
            small = left + 1
        if hd[i] <= hd[small]:
            break
        hd[small], hd[i] = hd[i], hd[small]
        hv[small], hv[i] = hv[i], hv[small]
        i = small
    return d, v, size


@_jit
def multi_source_dijkstra(indptr, indices, weights, sources):
    nv = indptr.shape[0] - 1
    dist = np.full(nv, np.inf)
    done = np.zeros(nv, dtype=np.bool_)
    cap = indices.shape[0] + sources.shape[0] + 1
    hd = np.empty(cap, dtype=np.float64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    for s in sources:
        if dist[s] > 0.0:
            dist[s] = 0.0
            size = _heap_push(hd, hv, size, 0.0, s)
    while size > 0:
        d, u, size = _heap_pop(hd, hv, size)
        if done[u]:
            continue
        done[u] = True
        for e in range(indptr[u], indptr[u + 1]):
            w = indices[e]
            nd = d + weights[e]
            if nd < dist[w]:
                dist[w] = nd
                size = _heap_push(hd, hv, size, nd, w)
    return dist
