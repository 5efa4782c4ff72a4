"""Exact reference computations.

These are the ground truth every approximate stage is checked against:
the quadratic edit-distance DP, thresholded EMD by optimal assignment,
product-space distances and the brute-force ideal distance.  They are meant
for desk-scale inputs only.
"""
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .errors import DependencyError, InvalidInputError

BINARY = 2
BYTES = 256


@dataclass(frozen=True)
class BitString:
    """A string over the alphabet ``{0, ..., alphabet - 1}``.

    Substrings use 1-based starts: ``substring(i, m)`` is ``x[i:i+m-1]``.
    """

    symbols: np.ndarray
    alphabet: int = BINARY

    def __post_init__(self):
        syms = np.ascontiguousarray(self.symbols, dtype=np.int32).reshape(-1)
        if syms.size and (syms.min() < 0 or syms.max() >= self.alphabet):
            raise InvalidInputError(f"symbol outside alphabet of size {self.alphabet}")
        syms.setflags(write=False)
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def from_text(cls, text):
        """Parse a ``'0'/'1'`` string."""
        bad = set(text) - {"0", "1"}
        if bad:
            raise InvalidInputError(f"binary strings accept only 0/1, got {sorted(bad)!r}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"), BINARY)

    @classmethod
    def from_bytes(cls, data):
        return cls(np.frombuffer(bytes(data), dtype=np.uint8), BYTES)

    def __len__(self):
        return int(self.symbols.shape[0])

    def __add__(self, other):
        other = as_bitstring(other)
        return BitString(np.concatenate([self.symbols, other.symbols]), max(self.alphabet, other.alphabet))

    def __eq__(self, other):
        if not isinstance(other, BitString):
            return NotImplemented
        return np.array_equal(self.symbols, other.symbols)

    def __hash__(self):
        return hash(self.symbols.tobytes())

    def substring(self, i, m):
        if i < 1 or m < 0 or i + m - 1 > len(self):
            raise InvalidInputError(f"substring start {i}, length {m} outside string of length {len(self)}")
        return BitString(self.symbols[i - 1:i - 1 + m], self.alphabet)

    def to_text(self):
        if self.alphabet == BINARY:
            return "".join("01"[v] for v in self.symbols)
        return bytes(self.symbols.astype(np.uint8)).decode("latin-1")


def as_bitstring(x):
    """Coerce str / bytes / BitString / integer sequences to a BitString."""
    if isinstance(x, BitString):
        return x
    if isinstance(x, str):
        return BitString.from_text(x)
    if isinstance(x, (bytes, bytearray)):
        return BitString.from_bytes(x)
    arr = np.asarray(x, dtype=np.int64).reshape(-1)
    alphabet = BINARY if arr.size == 0 or arr.max() < BINARY else BYTES
    return BitString(arr, alphabet)


@dataclass(frozen=True)
class PointSet:
    """A multiset of ``size`` integer vectors; ``threshold`` defaults to the size."""

    points: np.ndarray
    threshold: object = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InvalidInputError("a point set needs at least one point of a common dimension")
        object.__setattr__(self, "points", pts)
        if self.threshold is None:
            object.__setattr__(self, "threshold", pts.shape[0])

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class MinProductPoint:
    """An ``l x k`` matrix read as a point of the min-product of l copies of l1^k."""

    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise InvalidInputError("a min-product point needs at least one row")
        object.__setattr__(self, "rows", rows)


def exact_edit_distance(a, b):
    """Levenshtein distance by the quadratic dynamic program."""
    a, b = as_bitstring(a), as_bitstring(b)
    return int(_kernels.edit_distance(a.symbols, b.symbols))


def edit_distance_bfs(a, b):
    """Edit distance by breadth-first search over edit scripts.

    Exponential; only for strings of length <= 8 or so.  Intermediate strings
    are restricted to length ``max(|a|, |b|)``, which some optimal script
    always respects (deletions, then substitutions, then insertions).
    """
    a, b = tuple(as_bitstring(a).symbols.tolist()), tuple(as_bitstring(b).symbols.tolist())
    alphabet = sorted(set(a) | set(b)) or [0]
    cap = max(len(a), len(b))
    seen = {a: 0}
    queue = deque([a])
    while queue:
        cur = queue.popleft()
        d = seen[cur]
        if cur == b:
            return d
        nbrs = []
        for p in range(len(cur)):
            nbrs.append(cur[:p] + cur[p + 1:])
            nbrs.extend(cur[:p] + (c,) + cur[p + 1:] for c in alphabet if c != cur[p])
        if len(cur) < cap:
            nbrs.extend(cur[:p] + (c,) + cur[p:] for p in range(len(cur) + 1) for c in alphabet)
        for nxt in nbrs:
            if nxt not in seen:
                seen[nxt] = d + 1
                queue.append(nxt)
    raise AssertionError("unreachable")


def _as_pointset(A):
    return A if isinstance(A, PointSet) else PointSet(A)


def _temd_costs(A, B, threshold, unit):
    if A.size != B.size:
        raise InvalidInputError(f"TEMD needs equal sizes, got {A.size} and {B.size}")
    if A.dim != B.dim:
        raise InvalidInputError(f"TEMD needs equal dimensions, got {A.dim} and {B.dim}")
    t = Fraction(A.threshold if threshold is None else threshold)
    unit = Fraction(unit)
    # integer costs: min(unit*d, t) * denom
    denom = unit.denominator * t.denominator
    d = np.abs(A.points[:, None, :] - B.points[None, :, :]).sum(axis=2)
    scaled = d * (unit.numerator * t.denominator)
    cap = t.numerator * unit.denominator
    return np.minimum(scaled, cap), denom


def temd_exact(A, B, threshold=None, unit=1):
    """Thresholded Earth-Mover Distance as an exact Fraction.

    ``(1/s) * min over bijections tau of sum min(unit*||a - tau(a)||_1, t)``
    with the threshold ``t`` equal to the set size by default.  ``unit``
    rescales integer coordinates (level vectors carry a rational scale).
    """
    A, B = _as_pointset(A), _as_pointset(B)
    costs, denom = _temd_costs(A, B, threshold, unit)
    rows, cols = linear_sum_assignment(costs.astype(np.float64))
    return Fraction(int(costs[rows, cols].sum()), denom * A.size)


def temd_bruteforce(A, B, threshold=None, unit=1):
    """Same as :func:`temd_exact` by enumerating every bijection (s <= 7)."""
    A, B = _as_pointset(A), _as_pointset(B)
    costs, denom = _temd_costs(A, B, threshold, unit)
    s = A.size
    best = min(int(costs[np.arange(s), list(perm)].sum()) for perm in itertools.permutations(range(s)))
    return Fraction(best, denom * s)


def _rows(X):
    return X.rows if isinstance(X, MinProductPoint) else np.asarray(X, dtype=np.float64)


def min_product_distance(X, Y):
    """``min_i ||X_i - Y_i||_1`` over the rows of two min-product points."""
    X, Y = _rows(X), _rows(Y)
    if X.shape != Y.shape or X.ndim != 2:
        raise InvalidInputError(f"min-product shape mismatch: {X.shape} vs {Y.shape}")
    return float(np.abs(X - Y).sum(axis=1).min())


def sum_product_distance(X, Y, dist):
    if len(X) != len(Y):
        raise InvalidInputError(f"sum-product length mismatch: {len(X)} vs {len(Y)}")
    return sum(dist(a, b) for a, b in zip(X, Y))


def ideal_distance_sets(lower, m, i, b, s_min_exp=0):
    """The sets ``S_j^s`` of lower-level vectors behind the ideal distance at (m, i).

    Yields ``(j, s, points, unit)``; ``points`` holds the s consecutive
    lower-level vectors starting at ``i + (j-1)*l`` (1-based), ``l = m // b``.
    """
    l = m // b
    for f in range(s_min_exp, int(math.floor(math.log2(l))) + 1):
        s = 1 << f
        length = l - s + 1
        if length not in lower:
            raise DependencyError(f"lower level {length} needed by m={m}, s={s} is missing")
        level = lower[length]
        vecs = level.vectors
        for j in range(1, b + 1):
            start = i - 1 + (j - 1) * l
            if start + s > vecs.shape[0]:
                raise InvalidInputError(f"start {i} out of range for level {length}")
            yield j, s, vecs[start:start + s], level.scale


def ideal_distance_exact(x, m, i, j, lower, b, c=12, s_min_exp=0):
    """Brute-force ideal distance between ``x[i:i+m-1]`` and ``x[j:j+m-1]``.

    ``c * sum_j' sum_{s = 2^f <= l} TEMD(S_j'^s(x[i..]), S_j'^s(x[j..]))``,
    computed exactly.  ``lower`` maps a length to an object with ``vectors``
    (integer array) and ``scale`` (rational).  Cost grows as b log(l) s^3.
    """
    x = as_bitstring(x)
    if m > len(x) or b < 2 or m // b < 1:
        raise InvalidInputError(f"level m={m} is not valid for b={b} and |x|={len(x)}")
    for start in (i, j):
        if start < 1 or start + m - 1 > len(x):
            raise InvalidInputError(f"start {start} invalid for length {m}")
    left = ideal_distance_sets(lower, m, i, b, s_min_exp)
    right = ideal_distance_sets(lower, m, j, b, s_min_exp)
    total = Fraction(0)
    for (_, s, A, unit), (_, _, B, _) in zip(left, right):
        total += temd_exact(A, B, threshold=s, unit=unit)
    return c * total
