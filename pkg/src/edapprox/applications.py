"""Two uses of the estimator: a sublinear gap test and approximate pattern matching."""
from dataclasses import dataclass, field
import math

import numpy as np

from .config import RunConfig
from .driver import LevelBuilder, build_length_set, default_branching, estimate_edit_distance
from .errors import ConfigError, InvalidInputError
from .oracles import BitString, as_bitstring
from .rng import derive_seed, generator

CLOSE = "CLOSE"
FAR = "FAR"


@dataclass(frozen=True)
class GapSpec:
    """Promise ``ed <= n^exp_low`` (CLOSE) versus ``ed >= n^exp_high`` (FAR).

    ``trials`` is the number of sampled blocks and ``threshold`` the cutoff
    on a block estimate; both are derived from n and the config when None.
    """

    exp_low: float
    exp_high: float
    trials: int = None
    threshold: float = None

    def __post_init__(self):
        if not 0 <= self.exp_low < self.exp_high <= 1:
            raise InvalidInputError(f"need 0 <= a < beta <= 1, got a={self.exp_low}, beta={self.exp_high}")
        if self.trials is not None and self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        if self.threshold is not None and not self.threshold > 0:
            raise InvalidInputError("threshold must be positive")


@dataclass
class GapPlan:
    blocks: int
    block_len: int
    samples: int
    threshold: float
    distortion: float
    reps: int


@dataclass
class GapResult:
    """``reads`` counts block estimates made; ``read_unit`` is ``n^(1-beta) log2 n``."""

    decision: str
    plan: GapPlan
    reads: int
    read_unit: float
    sampled: list = field(default_factory=list)
    estimates: dict = field(default_factory=dict)


def _distortion(cfg, n):
    f = cfg.distortion(n)
    if f is None:
        raise ConfigError("the gap test needs a distortion table; run `calibrate` first")
    return max(1.0, f)


def plan_gap(n, spec, config=None):
    """Block count, block length, sample count and threshold for length n."""
    cfg = config or RunConfig()
    f = _distortion(cfg, n)
    lg = math.log2(max(2, n))
    blocks = max(1, min(n, math.ceil(n ** (spec.exp_high - spec.exp_low) / (f * lg))))
    samples = spec.trials or max(1, math.ceil(cfg.gap_c_samples * n ** (1 - spec.exp_high)))
    threshold = spec.threshold or cfg.gap_c_threshold * n ** spec.exp_low * f * lg
    reps = cfg.gap_reps or max(1, 2 * math.ceil(math.log2(lg)) + 1)
    return GapPlan(blocks, n // blocks, min(samples, blocks), threshold, f, reps)


def _block(x, j, plan, n):
    lo = j * plan.block_len
    hi = n if j == plan.blocks - 1 else lo + plan.block_len
    return BitString(x.symbols[lo:hi], x.alphabet)


def gap_distinguish(x, y, spec, config=None, seed=None):
    """Decide CLOSE or FAR by estimating a few sampled block pairs.

    Each sampled block gets a median of ``plan.reps`` independent estimates;
    the median stops early once its side of the threshold is settled.  The
    answer is FAR as soon as one block's median exceeds the threshold.
    """
    cfg = config or RunConfig()
    seed = cfg.seed if seed is None else seed
    x, y = as_bitstring(x), as_bitstring(y)
    n = len(x)
    if n != len(y) or n == 0:
        raise InvalidInputError("the gap test needs two nonempty strings of equal length")
    plan = plan_gap(n, spec, cfg)
    rng = generator(seed, "gap-blocks")
    picks = sorted(int(j) for j in rng.choice(plan.blocks, size=plan.samples, replace=False))
    need = plan.reps // 2 + 1
    reads = 0
    result = GapResult(CLOSE, plan, 0, n ** (1 - spec.exp_high) * math.log2(max(2, n)), picks)
    for j in picks:
        bx, by = _block(x, j, plan, n), _block(y, j, plan, n)
        vals, above = [], 0
        for r in range(plan.reps):
            est = estimate_edit_distance(bx, by, cfg, derive_seed(seed, "gap", j, r)).value
            reads += 1
            vals.append(est)
            above += est > plan.threshold
            if above >= need or len(vals) - above >= need:
                break
        result.estimates[j] = float(np.median(vals))
        if above >= need:
            result.decision = FAR
            break
    result.reads = reads
    return result


@dataclass
class MatchResult:
    """``best_start`` is 1-based into T; ``per_window[w]`` is the window at start w + 1."""

    best_start: int
    estimate: float
    per_window: np.ndarray = field(default=None, repr=False)
    chunks: int = 0
    reps: int = 0


def _chunk_starts(N, n):
    starts = list(range(0, N - 2 * n + 1, n))
    if starts[-1] + 2 * n < N:
        starts.append(N - 2 * n)
    return starts


def window_distances(text, pattern, config=None, seed=0):
    """Estimated distance from every length-n window of ``text`` to ``pattern``.

    ``text`` has length 2n here; windows run over starts 0 .. n (0-based).
    The pattern's own top-level vector sits at start 2n of ``text . pattern``.
    """
    cfg = config or RunConfig()
    text, pattern = as_bitstring(text), as_bitstring(pattern)
    n = len(pattern)
    if len(text) != 2 * n:
        raise InvalidInputError("a chunk must be exactly twice the pattern length")
    z = np.concatenate([text.symbols, pattern.symbols])
    b = cfg.branching or default_branching(n)
    W = build_length_set(n, b)
    builder = LevelBuilder(z, W, cfg, seed)
    starts = list(range(n + 1)) + [2 * n]
    top = builder.build(starts)
    V = top.source.dense().astype(np.float64)
    raw = np.abs(V[:-1] - V[-1]).sum(axis=1) * float(top.scale)
    return cfg.multiplier(n) * raw


def pattern_match(T, P, config=None, seed=None, reps=None):
    """Window of T closest to P in estimated edit distance.

    T is cut into chunks of length 2n stepped by n (plus one flush with the
    end), so each window lies inside one or two chunks.  Every chunk is
    estimated ``reps`` times; a window's score is the median over all its
    estimates.
    """
    cfg = config or RunConfig()
    seed = cfg.seed if seed is None else seed
    T, P = as_bitstring(T), as_bitstring(P)
    N, n = len(T), len(P)
    if n == 0 or N < 2 * n:
        raise InvalidInputError(f"need a nonempty pattern and |T| >= 2|P|, got N={N}, n={n}")
    reps = reps or cfg.match_reps or 2 * math.ceil(math.log2(max(2, N)))
    alphabet = max(T.alphabet, P.alphabet)
    T, P = BitString(T.symbols, alphabet), BitString(P.symbols, alphabet)
    chunks = _chunk_starts(N, n)
    scores = [[] for _ in range(N - n + 1)]
    for c, s in enumerate(chunks):
        chunk = BitString(T.symbols[s:s + 2 * n], alphabet)
        for r in range(reps):
            est = window_distances(chunk, P, cfg, derive_seed(seed, "match", c, r))
            for w, v in enumerate(est):
                scores[s + w].append(v)
    med = np.array([np.median(v) for v in scores])
    best = int(np.argmin(med))
    return MatchResult(best + 1, float(med[best]), med, len(chunks), reps)
