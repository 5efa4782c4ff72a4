"""Sliding-window embedding of thresholded EMD into a min-product of l1's.

A set ``A`` of integer vectors is mapped by randomly shifted grids of side
``R_i = 2^(i-2)`` to a sparse vector psi(A) (cell counts times ``R_i``), and then
by an implicit Cauchy matrix P to ``l1^k``.  Both maps are linear, so the
sketch of the window ``A_i = {v_i, ..., v_{i+s-1}}`` is a sum of singleton
sketches and all windows come out of one pass.  Neither psi nor P is ever
materialised: each occupied cell is a 128-bit hash, and the P column for that
cell is regenerated from a counter-mode stream keyed by the hash.
"""
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import _kernels
from .errors import InvalidInputError
from .rng import derive_seed, generator


def clog2(n):
    """``ceil(log2 n)``, at least 1."""
    return max(1, math.ceil(math.log2(max(2, n))))


@dataclass(frozen=True)
class VectorSource:
    """Integer vectors, stored densely or as a concatenation of shifted blocks.

    Vector ``p`` is the concatenation over ``j < nblk`` and ``src < S`` of
    ``blocks[src, p + j*step, :]``.  A dense ``(P, dim)`` array is the case
    ``nblk = 1``.  The implicit form lets level vectors of dimension
    ``b * (#s) * t`` be hashed without ever being materialised.
    """

    blocks: np.ndarray
    nblk: int = 1
    step: int = 0
    count: int = -1

    def __post_init__(self):
        blocks = np.asarray(self.blocks)
        if blocks.dtype not in (np.int32, np.int64):
            blocks = blocks.astype(np.int64)
        blocks = np.ascontiguousarray(blocks)
        if blocks.ndim == 2:
            blocks = blocks[None]
        object.__setattr__(self, "blocks", blocks)
        avail = blocks.shape[1] - (self.nblk - 1) * self.step
        if self.count < 0:
            object.__setattr__(self, "count", avail)
        elif self.count > avail:
            raise InvalidInputError("vector source is shorter than its declared count")

    @classmethod
    def wrap(cls, vectors):
        if isinstance(vectors, VectorSource):
            return vectors
        arr = np.asarray(vectors)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise InvalidInputError("vectors must form a 2-d array")
        if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
            raise InvalidInputError("vectors must be integer valued")
        return cls(arr.astype(np.int64))

    @property
    def dim(self):
        return self.nblk * self.blocks.shape[0] * self.blocks.shape[2]

    def __len__(self):
        return self.count

    def dense(self, positions=None):
        pos = np.arange(self.count) if positions is None else np.asarray(positions, dtype=np.int64)
        parts = [self.blocks[src, pos + j * self.step, :]
                 for j in range(self.nblk) for src in range(self.blocks.shape[0])]
        return np.concatenate(parts, axis=1)

    def max_abs(self):
        return int(np.abs(self.blocks).max()) if self.blocks.size else 0


@dataclass(frozen=True)
class GridSketchParams:
    """Configuration of one min-product sketch.

    ``dim`` is the vector dimension, ``coord_range`` the bound M on integer
    coordinates, ``window`` the set size s, ``levels`` the number of grid
    scales, ``proj_dim`` = k and ``reps`` = l (rows of the min-product).
    ``unit`` is the real length of one integer step, so grids act on
    ``unit * v``.  ``copies`` independently shifted grids per scale are
    averaged.
    """

    dim: int
    coord_range: int
    window: int
    levels: int
    proj_dim: int
    reps: int
    scale: float
    seed: int
    unit: float = 1.0
    copies: int = 1
    resync: int = 1 << 16

    def __post_init__(self):
        if self.levels < 1 or self.proj_dim < 1 or self.reps < 1 or self.copies < 1:
            raise InvalidInputError("levels, proj_dim, reps and copies must be >= 1")
        if self.window < 1 or self.dim < 1:
            raise InvalidInputError("window and dim must be >= 1")

    @classmethod
    def default(cls, n, window, dim, coord_range, seed, unit=1.0, *, c_proj=4, proj_cap=512,
                c_reps=2, reps_cap=32, c_scale=1.0, copies=1, levels=None):
        """Constants as functions of the number of vectors ``n``."""
        if coord_range > max(2, n) ** 4:
            raise InvalidInputError(f"coordinate range {coord_range} exceeds n^4 for n={n}")
        lg = clog2(n)
        return cls(
            dim=dim,
            coord_range=coord_range,
            window=window,
            levels=levels if levels is not None else clog2(window) + 2 if window > 1 else 2,
            proj_dim=max(1, min(c_proj * lg ** 3, proj_cap)),
            reps=max(1, min(c_reps * lg, reps_cap)),
            scale=c_scale * lg / window,
            seed=seed,
            unit=unit,
            copies=copies,
        )

    def side(self, level):
        """Grid side ``R_i = 2^(i-2)`` of the 1-based level ``i``."""
        return 2.0 ** (level - 2)

    def column_key(self, rep):
        return np.uint64(derive_seed(self.seed, "cauchy", rep))

    def grid(self, rep):
        return _grid_tables(self, rep)


@dataclass(frozen=True)
class _Grid:
    shifts: np.ndarray
    inv_r: np.ndarray
    seeds: np.ndarray
    values: np.ndarray
    levels: np.ndarray


def _grid_tables(params, rep):
    ng = params.levels * params.copies
    rng = generator(params.seed, "grid-shift", rep)
    shifts = rng.random((ng, params.dim))
    levels = np.repeat(np.arange(1, params.levels + 1), params.copies)
    sides = np.array([params.side(i) for i in levels])
    seeds = np.array([derive_seed(params.seed, "cell", rep, g) for g in range(ng)], dtype=np.uint64)
    # Cauchy normalisation 1/k folded into the cell value
    values = sides * params.scale / (params.copies * params.proj_dim)
    return _Grid(shifts, 1.0 / sides, seeds, values, levels)


@dataclass(frozen=True)
class SparseGridPoint:
    """psi({v}): one ``(level, cell id, value)`` entry per grid (level, copy)."""

    entries: tuple

    def __len__(self):
        return len(self.entries)


@dataclass
class WindowSketchSet:
    """Min-product sketches ``Q_i``: array of shape ``(count, reps, proj_dim)``.

    ``starts`` lists the 0-based window starts when only some were computed.
    """

    sketches: np.ndarray = field(repr=False)
    params: GridSketchParams
    starts: np.ndarray = None

    def __len__(self):
        return self.sketches.shape[0]

    def distance(self, i, j):
        return float(np.abs(self.sketches[i] - self.sketches[j]).sum(axis=1).min())

    @cached_property
    def row_norm_bound(self):
        return float(np.abs(self.sketches).max())


def _check_vectors(src, params):
    if src.dim != params.dim:
        raise InvalidInputError(f"vectors have dimension {src.dim}, params expect {params.dim}")


def grid_embed_singleton(v, params, rep=0):
    """Cells of the single vector ``v`` in every shifted grid of repetition ``rep``."""
    src = VectorSource.wrap(np.asarray(v).reshape(1, -1))
    _check_vectors(src, params)
    g = params.grid(rep)
    h1, h2 = _kernels.grid_cells(src.blocks, params.unit, 1, 0, np.zeros(1, dtype=np.int64),
                                 g.shifts, g.inv_r, g.seeds)
    entries = tuple((int(g.levels[i]), (int(h1[0, i]) << 64) | int(h2[0, i]), float(g.values[i] * params.proj_dim))
                    for i in range(len(g.levels)))
    return SparseGridPoint(entries)


def cauchy_column(cell_id, params, rep=0):
    """Column of the implicit Cauchy matrix for one occupied cell."""
    h1 = np.array([cell_id >> 64], dtype=np.uint64)
    h2 = np.array([cell_id & ((1 << 64) - 1)], dtype=np.uint64)
    return _kernels.cauchy_columns(h1, h2, params.column_key(rep), params.proj_dim)[0]


def singleton_sketch_reference(v, params, rep=0):
    """``P psi({v}) / k`` assembled entry by entry (slow path, for checking)."""
    point = grid_embed_singleton(v, params, rep)
    return sum(value / params.proj_dim * cauchy_column(cid, params, rep) for _, cid, value in point.entries)


def singleton_sketches(vectors, params, rep=0, positions=None):
    """``P psi({v_p}) / k`` for each requested position (all by default)."""
    src = VectorSource.wrap(vectors)
    _check_vectors(src, params)
    pos = np.arange(len(src), dtype=np.int64) if positions is None else np.asarray(positions, dtype=np.int64)
    g = params.grid(rep)
    return _kernels.singleton_sketches(src.blocks, params.unit, src.nblk, src.step, pos, g.shifts,
                                       g.inv_r, g.seeds, g.values, params.column_key(rep), params.proj_dim)


def _dyadic(single, s):
    # Snap to a grid of 2^-F fine enough that any sum of s entries is exact
    # in float64, so equal windows get bit-equal sketches.
    top = float(np.abs(single).max()) if single.size else 0.0
    if top == 0.0:
        return single
    F = 50 - math.ceil(math.log2(top * s))
    return np.ldexp(np.rint(np.ldexp(single, F)), -F)


def sliding_window_sketch(vectors, params, rep=0):
    """Window sketches ``q_1 .. q_{n-s+1}`` of one repetition, in one pass.

    ``q_{i+1} = q_i + P psi({v_{i+s}}) - P psi({v_i})``, recomputed from
    scratch every ``params.resync`` steps.
    """
    src = VectorSource.wrap(vectors)
    s = params.window
    if s > len(src):
        raise InvalidInputError(f"window {s} longer than the {len(src)} vectors")
    single = _dyadic(singleton_sketches(src, params, rep), s)
    return _kernels.sliding_sums(single, s, params.resync)


def window_sketches(vectors, params, starts, rep=0):
    """Sketches of the windows at the given 0-based starts, each from scratch."""
    src = VectorSource.wrap(vectors)
    s = params.window
    starts = np.asarray(starts, dtype=np.int64)
    if starts.size and (starts.min() < 0 or starts.max() + s > len(src)):
        raise InvalidInputError("window start out of range")
    needed = np.unique((starts[:, None] + np.arange(s)[None, :]).reshape(-1))
    single = _dyadic(singleton_sketches(src, params, rep, needed), s)
    lookup = np.searchsorted(needed, starts[:, None] + np.arange(s)[None, :])
    return single[lookup].sum(axis=1)


def minproduct_sketch(vectors, params, starts=None):
    """Stack ``params.reps`` independent window sketches into min-product points.

    Returns the sketches of every window, or only of ``starts`` when given.
    """
    src = VectorSource.wrap(vectors)
    _check_vectors(src, params)
    if params.window > len(src):
        raise InvalidInputError(f"window {params.window} longer than the {len(src)} vectors")
    if starts is None:
        rows = [sliding_window_sketch(src, params, z) for z in range(params.reps)]
    else:
        rows = [window_sketches(src, params, starts, z) for z in range(params.reps)]
    return WindowSketchSet(np.stack(rows, axis=1), params, None if starts is None else np.asarray(starts))
