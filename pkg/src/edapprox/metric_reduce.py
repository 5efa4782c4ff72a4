"""Non-oblivious reduction of min-product points to low-dimensional l1.

Pipeline: quantize to integers, hash every row with randomly shifted grids at
all relevant thresholds (one star forest per threshold, row and repetition),
merge the forests into one sparse graph through their shared point-vertices,
and run a Bourgain embedding of that graph with one multi-source Dijkstra per
coordinate.
"""
from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from . import _kernels
from .errors import ConfigError, InvalidInputError
from .rng import derive_seed, generator
from .temd_embed import WindowSketchSet, clog2

_INT_LIMIT = 2 ** 62


@dataclass(frozen=True)
class QuantizedSketches:
    """Integer min-product points ``round(2kn * Q)`` and the ``kn`` divisor."""

    points: np.ndarray
    multiplier: int
    divisor: int


@dataclass
class StarForest:
    """One tree metric: points sharing a cell form a star, stars meet far away.

    Tree distance is 0 for the same point, ``intra_weight * post_scale`` for
    points in one cell and ``inter_weight * post_scale`` otherwise.
    """

    assignment: np.ndarray = field(repr=False)
    threshold_exp: int
    row: int
    intra_weight: float
    inter_weight: float
    post_scale: float = 1.0

    def __post_init__(self):
        if not self.intra_weight < self.inter_weight:
            raise InvalidInputError("star edges must be shorter than the inter-star distance")

    def __len__(self):
        return self.assignment.shape[0]

    def tree_distance(self, i, j):
        if i == j:
            return 0.0
        w = self.intra_weight if self.assignment[i] == self.assignment[j] else self.inter_weight
        return w * self.post_scale


@dataclass
class WeightedGraph:
    """Undirected graph in CSR form; vertices ``0 .. n_points-1`` are the points."""

    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    n_points: int
    n_vertices: int

    @property
    def edge_count(self):
        return self.indices.shape[0] // 2

    @classmethod
    def from_edges(cls, u, v, w, n_points, n_vertices):
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        if w.size and w.min() < 0:
            raise InvalidInputError("edge weights must be nonnegative")
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        wt = np.concatenate([w, w])
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(n_vertices + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n_vertices), out=indptr[1:])
        return cls(indptr, dst[order].copy(), wt[order].copy(), n_points, n_vertices)

    def shortest_from(self, sources):
        return _kernels.multi_source_dijkstra(self.indptr, self.indices, self.weights,
                                              np.asarray(sources, dtype=np.int64))

    def is_connected(self):
        csr = scipy.sparse.csr_matrix((np.ones_like(self.weights), self.indices, self.indptr),
                                      shape=(self.n_vertices, self.n_vertices))
        return scipy.sparse.csgraph.connected_components(csr, directed=False)[0] == 1


@dataclass(frozen=True)
class BourgainParams:
    """Coordinates are laid out as ``(j, rep)`` pairs; set density is 2^-j."""

    set_exps: tuple
    reps_per_size: int
    seed: int

    def __post_init__(self):
        if not self.set_exps or self.reps_per_size < 1:
            raise InvalidInputError("Bourgain embedding needs >= 1 set size and repetition")

    @property
    def coord_count(self):
        return len(self.set_exps) * self.reps_per_size

    @classmethod
    def default(cls, n, seed, c_reps=1.0, reps_cap=None, max_exp=None):
        top = max(1, int(math.floor(math.log2(max(2, n)))))
        if max_exp is not None:
            top = min(top, max_exp)
        reps = max(1, int(round(c_reps * clog2(n))))
        if reps_cap is not None:
            reps = min(reps, reps_cap)
        return cls(tuple(range(1, top + 1)), reps, seed)


@dataclass(frozen=True)
class ReduceParams:
    """Constants of the min-product to l1 reduction.

    ``forest_reps`` repetitions per (threshold, row); the three multipliers
    default to ``ceil(log2 n)``, ``ceil(log2 n)^3`` and ``ceil(log2 n)``
    when None.  ``normalize='measured'`` rescales the output so that
    it dominates the input min-product distance on all but ``quantile`` of
    sampled pairs; ``'nominal'`` keeps the product of the stage factors.
    """

    forest_reps: int = None
    c_forest: float = 1.0
    forest_mult: float = None
    gamma: float = None
    bourgain_mult: float = None
    bourgain_c_reps: float = 4.0
    bourgain_reps_cap: int = None
    bourgain_max_exp: int = None
    prune_thresholds: bool = True
    normalize: str = "measured"
    quantile: float = 0.02
    calib_pairs: int = 2000

    def __post_init__(self):
        if self.normalize not in ("measured", "nominal"):
            raise ConfigError(f"unknown normalization {self.normalize!r}")
        for name in ("forest_mult", "gamma", "bourgain_mult"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise ConfigError(f"{name} must be positive")


@dataclass
class L1Embedding:
    """Output vectors plus the factors applied on the way."""

    vectors: np.ndarray = field(repr=False)
    scale: float
    factors: dict
    graph_edges: int = 0
    forests: int = 0

    def distance(self, i, j):
        return float(np.abs(self.vectors[i] - self.vectors[j]).sum())


def _sketch_array(sketches):
    arr = sketches.sketches if isinstance(sketches, WindowSketchSet) else np.asarray(sketches, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, None, :]
    if arr.ndim != 3:
        raise InvalidInputError("min-product points must have shape (count, rows, dim)")
    return arr


def quantize_minproduct(sketches, k=None, n=None):
    """Scale by ``2kn`` and round; distances then shrink back by ``kn``."""
    arr = _sketch_array(sketches)
    k = arr.shape[2] if k is None else int(k)
    n = arr.shape[0] if n is None else int(n)
    mult = 2 * k * n
    scaled = np.rint(arr * mult)
    if scaled.size and np.abs(scaled).max() >= _INT_LIMIT:
        raise ConfigError("quantized coordinates overflow 64-bit integers")
    return QuantizedSketches(scaled.astype(np.int64), mult, k * n)


def default_thresholds(points):
    top = int(np.abs(points).max()) if points.size else 1
    return list(range(0, clog2(max(2, top)) + 1))


def pruned_thresholds(points, k):
    """Thresholds that can separate anything: distinct points sit >= k apart
    after quantization, and nothing is farther apart than the row diameter."""
    diam = max(1, int((points.max(axis=0) - points.min(axis=0)).sum(axis=-1).max())) if points.size else 1
    lo = max(0, int(math.floor(math.log2(max(1, k)))) - 1)
    hi = clog2(diam) + 1
    return list(range(lo, max(lo, hi) + 1))


def minprod_to_star_forests(points, seed, reps=None, thresholds=None, post_scale=1.0, n=None):
    """Star forests per (threshold 2^t, row, repetition).

    Rows are hashed by ``floor((x + u) / 2^t)`` with ``u`` uniform in
    ``[0, 2^t)^k``.  Weights are ``2^t`` inside a star and ``2Mk`` between
    stars.  Forests with no shared cell are dropped, as are all but the
    narrowest of those with a single cell.
    """
    pts = np.asarray(points)
    if pts.ndim == 2:
        pts = pts[:, None, :]
    if pts.size and not np.issubdtype(pts.dtype, np.integer):
        if not np.all(np.equal(np.mod(pts, 1), 0)):
            raise InvalidInputError("star forests need integer coordinates")
    pts = pts.astype(np.int64)
    npts, rows, k = pts.shape
    n = npts if n is None else n
    reps = clog2(n) if reps is None else reps
    thresholds = default_thresholds(pts) if thresholds is None else list(thresholds)
    M = max(1, int(np.abs(pts).max()) if pts.size else 1)
    inter = 2.0 * M * k
    # a star as wide as the whole range separates nothing
    thresholds = [t for t in thresholds if 2.0 ** t < inter] or [0]
    forests = []
    row_views = [np.ascontiguousarray(pts[:, r, :]) for r in range(rows)]
    # Scan from the widest grid down.  Below the first threshold that isolates
    # every point nothing more can merge, and of the grids that merge all
    # points only the narrowest matters.
    for r, X in enumerate(row_views):
        for z in range(reps):
            found, merged = [], None
            for t in sorted(thresholds, reverse=True):
                width = float(2 ** t)
                rng = generator(seed, "forest", t, r, z)
                shifts = rng.random(k) * width
                keys = _kernels.forest_keys(X, shifts, width, np.uint64(derive_seed(seed, "forest-key", t, r, z)))
                _, labels = np.unique(keys, return_inverse=True)
                top = int(labels.max()) if npts else 0
                if top == npts - 1 and npts > 1:
                    break
                forest = StarForest(labels.astype(np.int32).reshape(-1), t, r, width, inter, post_scale)
                if top == 0:
                    merged = forest
                else:
                    found.append(forest)
            if merged is not None:
                found.append(merged)
            forests.extend(sorted(found, key=lambda f: f.threshold_exp))
    return forests


def min_forest_distance(forests, i, j):
    return min(f.tree_distance(i, j) for f in forests)


def forests_to_graph(forests, gamma=1.0):
    """Merge all forests through their shared point-vertices.

    Every point links to one shared root at half the inter-star distance,
    which yields the same metric as one root per forest.  Cells holding a
    single point need no centre: the root path is never longer than a star
    path through an extra vertex.
    """
    if not forests:
        raise InvalidInputError("need at least one forest")
    npts = len(forests[0])
    if any(len(f) != npts for f in forests):
        raise InvalidInputError("forests are over different point sets")
    us, vs, ws = [], [], []
    nxt = npts + 1
    root = npts
    half_inter = max(f.inter_weight * f.post_scale for f in forests) / 2.0
    us.append(np.arange(npts))
    vs.append(np.full(npts, root))
    ws.append(np.full(npts, half_inter * gamma))
    for f in forests:
        counts = np.bincount(f.assignment)
        shared = counts[f.assignment] > 1
        if not shared.any():
            continue
        members = np.nonzero(shared)[0]
        _, centre = np.unique(f.assignment[members], return_inverse=True)
        us.append(members)
        vs.append(centre + nxt)
        ws.append(np.full(members.shape[0], f.intra_weight * f.post_scale / 2.0 * gamma))
        nxt += int(centre.max()) + 1
    return WeightedGraph.from_edges(np.concatenate(us), np.concatenate(vs), np.concatenate(ws), npts, nxt)


def bourgain_embed(graph, params, point_vertices=None):
    """Raw coordinates ``rho(u, A)`` for random sets A of point-vertices."""
    if not graph.is_connected():
        raise InvalidInputError("Bourgain embedding needs a connected graph")
    pv = np.arange(graph.n_points) if point_vertices is None else np.asarray(point_vertices, dtype=np.int64)
    out = np.empty((pv.shape[0], params.coord_count), dtype=np.float64)
    col = 0
    for j in params.set_exps:
        for rep in range(params.reps_per_size):
            rng = generator(params.seed, "bourgain", j, rep)
            prob = 2.0 ** -j
            A = pv[rng.random(pv.shape[0]) < prob]
            if A.size == 0:
                A = pv[rng.random(pv.shape[0]) < prob]
            if A.size == 0:
                A = pv[rng.integers(pv.shape[0])][None]
            out[:, col] = graph.shortest_from(A)[pv]
            col += 1
    return out


def _measured_factor(vectors, arr, seed, quantile, max_pairs):
    npts = vectors.shape[0]
    if npts < 2:
        return None
    rng = generator(seed, "calibrate-pairs")
    total = npts * (npts - 1) // 2
    if total <= max_pairs:
        ii, jj = np.triu_indices(npts, 1)
    else:
        ii = rng.integers(0, npts, max_pairs)
        jj = rng.integers(0, npts, max_pairs)
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    ref = np.abs(arr[ii] - arr[jj]).sum(axis=2).min(axis=1)
    got = np.abs(vectors[ii] - vectors[jj]).sum(axis=1)
    ok = (ref > 0) & (got > 0)
    if not ok.any():
        return None
    return float(np.quantile(ref[ok] / got[ok], 1.0 - quantile))


def reduce_minprod_to_l1(sketches, seed, params=None, n=None):
    """Embed min-product points into l1 (quantize, forests, graph, Bourgain).

    Identical points are merged first, so they come out at distance exactly 0.
    """
    params = params or ReduceParams()
    arr = _sketch_array(sketches)
    count, rows, k = arr.shape
    n = count if n is None else n
    lg = clog2(n)
    forest_mult = lg if params.forest_mult is None else params.forest_mult
    gamma = lg ** 3 if params.gamma is None else params.gamma
    bmult = lg if params.bourgain_mult is None else params.bourgain_mult

    quant = quantize_minproduct(arr, k, n)
    flat = quant.points.reshape(count, -1)
    uniq, first, inverse = np.unique(flat, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    upts = uniq.reshape(-1, rows, k)
    factors = {"quantize": float(quant.multiplier), "unscale": 1.0 / quant.divisor,
               "forest": float(forest_mult), "gamma": float(gamma), "bourgain": float(bmult)}
    nominal = forest_mult * gamma * bmult
    if upts.shape[0] == 1:
        bp = BourgainParams.default(n, 0, params.bourgain_c_reps, params.bourgain_reps_cap, params.bourgain_max_exp)
        return L1Embedding(np.zeros((count, bp.coord_count)), nominal, dict(factors, measured=1.0))

    thresholds = pruned_thresholds(upts, k) if params.prune_thresholds else default_thresholds(upts)
    freps = params.forest_reps if params.forest_reps is not None else max(1, int(round(params.c_forest * lg)))
    forests = minprod_to_star_forests(upts, derive_seed(seed, "forests"), freps, thresholds,
                                      post_scale=forest_mult / quant.divisor, n=n)
    graph = forests_to_graph(forests, gamma)
    bp = BourgainParams.default(n, derive_seed(seed, "bourgain"), params.bourgain_c_reps,
                                params.bourgain_reps_cap, params.bourgain_max_exp)
    raw = bourgain_embed(graph, bp) * bmult
    scale = nominal
    if params.normalize == "measured":
        factor = _measured_factor(raw, arr[first], seed, params.quantile, params.calib_pairs)
        if factor is not None:
            raw = raw * factor
            scale = nominal * factor
            factors["measured"] = factor
    return L1Embedding(raw[inverse], scale, factors, graph.edge_count, len(forests))
