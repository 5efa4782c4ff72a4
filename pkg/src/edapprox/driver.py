"""Recursive edit-distance estimator.

Every substring length m in the closed set W gets one integer vector per
start position of the working string ``z = x . y``.  Short lengths are
hashed to random bit vectors.  A long length m concatenates, over the b
blocks and every window size s, the l1 images of windows of s consecutive
lower-level vectors (lower length ``m // b - s + 1``).  The estimate is the
l1 distance between the top-level vectors of x and of y.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import math
import time

import numpy as np

from . import _kernels
from .config import RunConfig
from .errors import DependencyError, InvalidInputError
from .metric_reduce import ReduceParams, reduce_minprod_to_l1
from .oracles import BitString, as_bitstring
from .rng import derive_seed, generator
from .temd_embed import GridSketchParams, VectorSource, clog2, minproduct_sketch


def paper_branching(n):
    """``2^(sqrt(log n * log log n))`` rounded to the nearest power of two."""
    lg = math.log2(max(4, n))
    return 1 << max(1, round(math.sqrt(lg * math.log2(lg))))


def default_branching(n):
    """Branching used when none is configured.

    The asymptotic value exceeds ``sqrt(n)`` for every n below about 2^40,
    which would make the whole string a single hashed base case; capping at
    the smallest power of two >= ``n^(1/4)`` keeps exactly two embedded
    levels above the base case at desk scale.
    """
    quarter = 1 << max(1, math.ceil(math.log2(max(2, n)) / 4))
    return max(2, min(paper_branching(n), quarter))


@dataclass(frozen=True)
class LengthSet:
    """Closed set of substring lengths with branching b."""

    n: int
    branching: int
    lengths: tuple

    def __contains__(self, m):
        return m in self._members

    def __iter__(self):
        return iter(self.lengths)

    def __len__(self):
        return len(self.lengths)

    @property
    def _members(self):
        return frozenset(self.lengths)

    def children(self, m, s_min_exp=0):
        if m < self.branching:
            return []
        l = m // self.branching
        return [l - (1 << f) + 1 for f in range(s_min_exp, int(math.floor(math.log2(l))) + 1)]

    def is_closed(self):
        mem = self._members
        return self.n in mem and all(c in mem for m in self.lengths for c in self.children(m))

    def is_base(self, m):
        return m <= self.branching ** 2

    def required(self, s_min_exp=0):
        """Lengths actually built: n, and the children of every non-base length."""
        need, stack = {self.n}, [self.n]
        while stack:
            m = stack.pop()
            if self.is_base(m):
                continue
            for c in self.children(m, s_min_exp):
                if c not in need:
                    need.add(c)
                    stack.append(c)
        return sorted(need)


def build_length_set(n, b, max_size=10 ** 4):
    """Minimal W containing n and closed under ``m -> m // b - 2^j + 1``."""
    if n < 1 or b < 2:
        raise InvalidInputError(f"need n >= 1 and b >= 2, got n={n}, b={b}")
    ls = LengthSet(n, b, ())
    seen, stack = {n}, [n]
    while stack:
        for c in ls.children(stack.pop()):
            if c not in seen:
                seen.add(c)
                stack.append(c)
                if len(seen) > max_size:
                    raise InvalidInputError(f"length set exceeds {max_size} members")
    return LengthSet(n, b, tuple(sorted(seen)))


@dataclass
class LevelVectorSet:
    """Integer vectors for one substring length; real value = vector * scale.

    Row r belongs to the substring starting at ``starts[r]`` (0-based), or at
    r itself when ``starts`` is None.
    """

    length: int
    source: VectorSource = field(repr=False)
    scale: Fraction
    starts: np.ndarray = None

    def __len__(self):
        return len(self.source)

    @property
    def dim(self):
        return self.source.dim

    @property
    def vectors(self):
        return self.source.dense()

    def rows(self, rows):
        return self.source.dense(rows)

    def distance(self, r1, r2):
        v = self.source.dense(np.array([r1, r2]))
        return float(np.abs(v[0] - v[1]).sum()) * float(self.scale)


def _seed_bases(seed, m):
    rng = generator(seed, "base-hash", m)
    return (np.uint64(rng.integers(1 << 20, (1 << 61) - 1)), np.uint64(rng.integers(1 << 20, (1 << 61) - 1)))


def base_level_vectors(x, m, dim_alpha, seed, b=None):
    """Random bit vectors of every length-m substring, scaled to distance ~ m.

    Equal substrings share a vector; distinct ones differ in about half of
    ``dim_alpha`` bits, which the scale ``2m / dim_alpha`` maps to about m.
    """
    x = x if isinstance(x, np.ndarray) else as_bitstring(x).symbols
    if b is not None and m > b * b:
        raise InvalidInputError(f"base level length {m} exceeds b^2 = {b * b}")
    if not 1 <= m <= x.shape[0]:
        raise InvalidInputError(f"base length {m} invalid for a string of length {x.shape[0]}")
    b1, b2 = _seed_bases(seed, m)
    keys = _kernels.substring_keys(np.ascontiguousarray(x, dtype=np.int32), m, b1, b2)
    bits = _kernels.hash_bits(keys, dim_alpha, np.uint64(derive_seed(seed, "base-bits", m)))
    return LevelVectorSet(m, VectorSource(bits.astype(np.int32)), Fraction(2 * m, dim_alpha))


def _sketch_params(count, s, src, unit, cfg, seed):
    return GridSketchParams.default(
        count, s, src.dim, max(1, src.max_abs()), seed, unit=unit,
        c_proj=cfg.sketch_c_proj, proj_cap=cfg.sketch_proj_cap, c_reps=cfg.sketch_c_reps,
        reps_cap=cfg.sketch_reps_cap, c_scale=cfg.sketch_c_scale, copies=cfg.sketch_copies)


def _reduce_params(cfg, count):
    return ReduceParams(
        forest_reps=cfg.reduce_forest_reps or None,
        gamma=float(clog2(count)) ** cfg.reduce_gamma_exp,
        normalize=cfg.reduce_normalize,
        quantile=cfg.reduce_quantile,
        bourgain_c_reps=cfg.bourgain_c_reps,
        bourgain_reps_cap=cfg.bourgain_reps_cap or None,
        bourgain_max_exp=cfg.bourgain_max_exp or None,
    )


def _boosted(cfg):
    # partial levels embed few points, so extra repetitions are cheap there
    k = cfg.top_boost
    if k == 1:
        return cfg
    return cfg.with_(sketch_reps_cap=cfg.sketch_reps_cap * k, sketch_c_reps=cfg.sketch_c_reps * k,
                     bourgain_reps_cap=(cfg.bourgain_reps_cap or 1) * k, bourgain_c_reps=cfg.bourgain_c_reps * k)


def window_embedding(lower, s, cfg, seed, positions=None):
    """l1 images of the windows of s consecutive lower-level vectors.

    All windows by default, else only those starting at ``positions``.
    """
    src = lower.source
    total = len(src) - s + 1
    if total < 1:
        raise InvalidInputError(f"window {s} longer than level {lower.length}")
    count = total if positions is None else len(positions)
    params = _sketch_params(max(2, len(src)), s, src, float(lower.scale), cfg,
                            derive_seed(seed, "sketch", lower.length, s))
    sketches = minproduct_sketch(src, params, positions)
    emb = reduce_minprod_to_l1(sketches, derive_seed(seed, "reduce", lower.length, s),
                               _reduce_params(cfg, count), n=max(2, count))
    return emb.vectors


def _integerize(Q, count, quant_bits):
    top = float(np.abs(Q).max()) if Q.size else 0.0
    if top == 0.0:
        return np.zeros(Q.shape, dtype=np.int32), Fraction(1)
    limit = min(2 ** quant_bits, max(2, count) ** 4)
    e = math.ceil(math.log2(top / limit))
    ints = np.rint(np.ldexp(Q, -e)).astype(np.int64)
    dtype = np.int32 if np.abs(ints).max() < 2 ** 31 else np.int64
    return ints.astype(dtype), Fraction(2) ** e


def _calibration_pairs(count, m, cfg, seed, starts=None):
    rng = generator(seed, "level-calib", m)
    pairs = []
    for f in range(cfg.calib_offsets):
        d = 1 << f
        if d > m // 2 or d >= count:
            break
        hi = count - d
        for i in rng.integers(0, hi, cfg.calib_samples):
            pairs.append((int(i), int(i) + d))
    return pairs


def _shift_factor(z, m, ests, pairs, quantile):
    ratios = []
    for (i, j), est in zip(pairs, ests):
        band = 2 * (j - i)
        ed = int(_kernels.banded_edit_distance(z[i:i + m], z[j:j + m], band))
        if est > 0 and ed > 0:
            ratios.append(ed / est)
    if not ratios:
        return None
    return float(np.quantile(ratios, 1.0 - quantile))


class LevelBuilder:
    """Builds level vectors over one working string, caching shared pipelines."""

    def __init__(self, z, lengths, cfg, seed):
        self.z = np.ascontiguousarray(z, dtype=np.int32)
        self.W = lengths
        self.b = lengths.branching
        self.cfg = cfg
        self.seed = seed
        self.levels = {}
        self.stats = {"pipelines": 0, "levels": 0, "seconds": {}}
        self._cache = {}

    def s_values(self, m):
        l = m // self.b
        return [1 << f for f in range(self.cfg.s_min_exp, int(math.floor(math.log2(l))) + 1)]

    def _map(self, fn, items):
        if self.cfg.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.cfg.threads) as pool:
                return list(pool.map(fn, items))
        return [fn(it) for it in items]

    def lower(self, length):
        if length not in self.levels:
            raise DependencyError(f"level {length} has not been built")
        return self.levels[length]

    def base(self, m):
        return base_level_vectors(self.z, m, self.cfg.base_dim, derive_seed(self.seed, "base"), self.b)

    def assemble(self, m, starts=None, calibrate=True):
        """Level vectors for length m from the already built lower levels."""
        b = self.b
        l = m // b
        svals = self.s_values(m)
        for s in svals:
            self.lower(l - s + 1)
        count = self.z.shape[0] - m + 1
        if starts is None:
            embs = self._map(self._full_pipeline, [(l - s + 1, s) for s in svals])
            Q = self.cfg.c_norm * np.stack(embs)
            ints, unit = _integerize(Q, count, self.cfg.quant_bits)
            level = LevelVectorSet(m, VectorSource(ints, nblk=b, step=l, count=count), unit)
        else:
            starts = np.asarray(starts, dtype=np.int64)
            if starts.min() < 0 or starts.max() >= count:
                raise InvalidInputError("level start out of range")
            pos = np.unique((starts[:, None] + l * np.arange(b)[None, :]).reshape(-1))
            cfg = _boosted(self.cfg)
            embs = self._map(lambda s: window_embedding(self.lower(l - s + 1), s, cfg, self.seed, pos), svals)
            self.stats["pipelines"] += len(svals)
            idx = np.searchsorted(pos, starts[:, None] + l * np.arange(b)[None, :])
            # (start, block, s, coord) flattened per start
            E = np.stack(embs)  # (S, P, t)
            dense = E[:, idx, :].transpose(1, 2, 0, 3).reshape(len(starts), -1)
            ints, unit = _integerize(self.cfg.c_norm * dense, count, self.cfg.quant_bits)
            level = LevelVectorSet(m, VectorSource(ints), unit, starts)
        if calibrate and self.cfg.level_calibration == "shift":
            self._calibrate(level, count)
        return level

    def _full_pipeline(self, key):
        # shared by every length with the same m // b
        if key not in self._cache:
            self._cache[key] = window_embedding(self.lower(key[0]), key[1], self.cfg, self.seed)
            self.stats["pipelines"] += 1
        return self._cache[key]

    def _calibrate(self, level, count):
        m = level.length
        if level.starts is None:
            pairs = _calibration_pairs(count, m, self.cfg, self.seed)
            if not pairs:
                return
            rows = np.array(pairs)
            A = level.rows(rows[:, 0])
            B = level.rows(rows[:, 1])
            ests = np.abs(A - B).sum(axis=1) * float(level.scale)
        else:
            where = {int(st): r for r, st in enumerate(level.starts)}
            pairs = [(i, j) for i in where for j in where
                     if (i == 0 or j == count - 1) and 0 < j - i <= m // 2 and (j - i) & (j - i - 1) == 0]
            if not pairs:
                return
            ests = [level.distance(where[i], where[j]) for i, j in pairs]
        factor = _shift_factor(self.z, m, ests, pairs, self.cfg.level_quantile)
        if factor:
            level.scale = level.scale * Fraction(factor)

    def build(self, top_starts):
        """Build every required level, then the top level at ``top_starts``."""
        req = self.W.required(self.cfg.s_min_exp)
        top = self.W.n
        parents = {}
        for m in req:
            if not self.W.is_base(m):
                for c in self.W.children(m, self.cfg.s_min_exp):
                    parents.setdefault(c, set()).add(m)
        for m in req:
            if m == top:
                break
            t0 = time.perf_counter()
            self.levels[m] = self.base(m) if self.W.is_base(m) else self.assemble(m)
            self.stats["seconds"][m] = time.perf_counter() - t0
            self.stats["levels"] += 1
            self._release(m, parents)
        if self.W.is_base(top):
            lvl = self.base(top)
            starts = np.asarray(top_starts, dtype=np.int64)
            return LevelVectorSet(top, VectorSource(lvl.rows(starts)), lvl.scale, starts)
        return self.assemble(top, top_starts)

    def _release(self, done, parents):
        for c in self.W.children(done, self.cfg.s_min_exp) if not self.W.is_base(done) else []:
            ps = parents.get(c, set())
            ps.discard(done)
            if not ps and c in self.levels:
                del self.levels[c]
                for key in [k for k in self._cache if k[0] == c]:
                    del self._cache[key]


@dataclass
class Estimate:
    """Result of one estimator run.  ``value`` is the calibrated estimate."""

    value: float
    raw: float
    n: int
    branching: int
    lengths: int
    padded: int
    seconds: float
    stats: dict = field(default_factory=dict, repr=False)


def pad_pair(x, y):
    """Pad the shorter string with a symbol outside both alphabets."""
    x, y = as_bitstring(x), as_bitstring(y)
    if len(x) == len(y):
        return x, y, 0
    alphabet = max(x.alphabet, y.alphabet)
    pad = alphabet
    n = max(len(x), len(y))

    def grow(s):
        return BitString(np.concatenate([s.symbols, np.full(n - len(s), pad, dtype=np.int32)]), alphabet + 1)

    return (grow(x) if len(x) < n else BitString(x.symbols, alphabet + 1),
            grow(y) if len(y) < n else BitString(y.symbols, alphabet + 1), n - min(len(x), len(y)))


def _top_starts(n, cfg):
    starts = {0, n}
    if cfg.level_calibration == "shift":
        for f in range(cfg.calib_offsets):
            d = 1 << f
            if d > n // 2:
                break
            starts.update((d, n - d))
    return sorted(starts)


def estimate_edit_distance(x, y, config=None, seed=None):
    """Full estimator run with diagnostics (see :func:`approx_edit_distance`)."""
    cfg = config or RunConfig()
    seed = cfg.seed if seed is None else seed
    t0 = time.perf_counter()
    x, y, padded = pad_pair(x, y)
    n = len(x)
    if n == 0:
        raise InvalidInputError("inputs must not both be empty")
    if n > cfg.max_n:
        raise InvalidInputError(f"input length {n} exceeds max_n={cfg.max_n}")
    b = cfg.branching or default_branching(n)
    W = build_length_set(n, b)
    z = np.concatenate([x.symbols, y.symbols])
    builder = LevelBuilder(z, W, cfg, seed)
    starts = _top_starts(n, cfg)
    top = builder.build(starts)
    rx, ry = starts.index(0), starts.index(n)
    raw = top.distance(rx, ry)
    value = cfg.multiplier(n) * raw
    if value <= cfg.calib_floor:
        value = 0.0
    stats = dict(builder.stats, required=len(W.required(cfg.s_min_exp)))
    return Estimate(value, raw, n, b, len(W), padded, time.perf_counter() - t0, stats)


def approx_edit_distance(x, y, config=None, seed=None):
    """Estimate ed(x, y); inputs of unequal length are padded first."""
    return estimate_edit_distance(x, y, config, seed).value


def level_vectors(x, m, lower, config=None, seed=0, b=None, starts=None):
    """Level vectors of length m over x, given the lower levels it needs.

    ``lower`` maps each length ``m // b - s + 1`` to its LevelVectorSet.
    """
    cfg = config or RunConfig()
    z = as_bitstring(x).symbols
    b = b or cfg.branching or default_branching(len(z))
    W = LengthSet(m, b, (m,))
    if W.is_base(m):
        raise InvalidInputError(f"length {m} is a base case for b={b}")
    builder = LevelBuilder(z, W, cfg, seed)
    builder.levels = dict(lower)
    return builder.assemble(m, starts)
