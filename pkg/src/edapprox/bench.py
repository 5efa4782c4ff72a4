"""Benchmark and calibration harness.

Instances are random strings with planted edits; the exact DP distance is
attached whenever n is at most the oracle cap.
"""
from dataclasses import asdict, dataclass, field
import math
import time

import numpy as np

from . import _kernels
from .config import RunConfig, format_table
from .driver import estimate_edit_distance
from .errors import ConfigError, InvalidInputError
from .oracles import BitString, exact_edit_distance
from .rng import derive_seed, generator


def planted_pair(n, d, seed, alphabet=2):
    """Random x of length n and y = x after d random edits, trimmed or padded to n.

    Edits are uniform over substitution, insertion and deletion at a uniform
    position; the true distance is at most d and usually somewhat below.
    """
    if n < 1 or d < 0:
        raise InvalidInputError("need n >= 1 and d >= 0")
    rng = generator(seed, "planted", n, d)
    x = rng.integers(0, alphabet, n)
    y = list(x)
    for _ in range(d):
        op = int(rng.integers(3))
        p = int(rng.integers(0, max(1, len(y))))
        if op == 0 or not y:
            y.insert(p, int(rng.integers(alphabet)))
        elif op == 1:
            del y[p]
        else:
            y[p] = (y[p] + int(rng.integers(1, alphabet))) % alphabet
    y = y[:n] + [int(v) for v in rng.integers(0, alphabet, max(0, n - len(y)))]
    return BitString(x, alphabet), BitString(np.array(y), alphabet)


@dataclass
class SizeReport:
    n: int
    edits: int
    estimate: float
    raw: float
    exact: int = None
    ratio: float = None
    seconds: float = 0.0


@dataclass
class BenchReport:
    """Per-size rows plus metadata.  ``seconds`` are wall times of the estimator alone."""

    per_size: list
    config_hash: str
    seed: int
    backend: str = _kernels.BACKEND
    distortion: dict = field(default_factory=dict)

    def deterministic(self):
        """The report without wall times (stable across runs)."""
        rows = [{k: v for k, v in asdict(r).items() if k != "seconds"} for r in self.per_size]
        return {"config_hash": self.config_hash, "seed": self.seed, "per_size": rows,
                "distortion": self.distortion}

    def time_ratios(self):
        rows = sorted(self.per_size, key=lambda r: r.n)
        return [(b.n, b.seconds / a.seconds) for a, b in zip(rows, rows[1:]) if a.seconds > 0]


def _warm_up(cfg):
    # first use compiles the kernels; keep that out of the timings
    x, y = planted_pair(64, 4, 0)
    estimate_edit_distance(x, y, cfg, 0)


def _ratio_stats(ratios):
    if not ratios:
        return {}
    r = np.array(ratios)
    return {"min": float(r.min()), "median": float(np.median(r)), "max": float(r.max())}


def bench(sizes, config=None, seed=None, with_exact=True, edit_fraction=1 / 16):
    """Time one estimate per size on a planted pair with ``n * edit_fraction`` edits."""
    cfg = config or RunConfig()
    seed = cfg.seed if seed is None else seed
    _warm_up(cfg)
    rows = []
    for n in sizes:
        d = max(1, int(round(n * edit_fraction)))
        x, y = planted_pair(n, d, derive_seed(seed, "bench", n))
        t0 = time.perf_counter()
        est = estimate_edit_distance(x, y, cfg, derive_seed(seed, "bench-run", n))
        secs = time.perf_counter() - t0
        row = SizeReport(n, d, est.value, est.raw, seconds=secs)
        if with_exact and n <= cfg.oracle_cap:
            row.exact = exact_edit_distance(x, y)
            if row.exact > 0:
                row.ratio = est.value / row.exact
        rows.append(row)
    ratios = [r.ratio for r in rows if r.ratio is not None]
    return BenchReport(rows, cfg.config_hash(), seed, distortion=_ratio_stats(ratios))


@dataclass
class CalibrationSample:
    n: int
    edits: int
    exact: int
    raw: float


@dataclass
class Calibration:
    config: RunConfig
    samples: list
    multipliers: dict
    distortions: dict
    floor: float


def calibration_instances(n, seed, pairs=3, fractions=(1 / 128, 1 / 16, 1 / 2)):
    for f in fractions:
        d = max(1, int(round(n * f)))
        for p in range(pairs):
            yield d, planted_pair(n, d, derive_seed(seed, "calibrate", n, d, p))


def calibrate(sizes, config=None, seed=None, pairs=3, margin=1.1, fractions=(1 / 128, 1 / 16, 1 / 2)):
    """Fit the non-contraction multiplier and record F_emp per size.

    ``multiplier(n) = margin * max(ed / raw)`` over planted pairs, so every
    calibration pair comes out non-contracting; F_emp(n) is then the largest
    calibrated ``estimate / ed``.  Identical pairs fix the floor.
    """
    cfg = config or RunConfig()
    seed = cfg.seed if seed is None else seed
    if not sizes:
        raise InvalidInputError("calibrate needs at least one size")
    if max(sizes) > cfg.oracle_cap:
        raise ConfigError(f"calibration sizes must not exceed the oracle cap {cfg.oracle_cap}")
    base = cfg.with_(calib_table="", calib_multiplier=1.0, calib_floor=0.0, distortion_table="")
    samples, mults, dists = [], {}, {}
    floor = 0.0
    for n in sorted(sizes):
        rows = []
        for d, (x, y) in calibration_instances(n, seed, pairs, fractions):
            est = estimate_edit_distance(x, y, base, derive_seed(seed, "calibrate-run", n, d, len(rows)))
            rows.append(CalibrationSample(n, d, exact_edit_distance(x, y), est.raw))
        x, _ = planted_pair(n, 0, derive_seed(seed, "calibrate-same", n))
        floor = max(floor, estimate_edit_distance(x, x, base, derive_seed(seed, "calibrate-same", n)).raw)
        usable = [r for r in rows if r.exact > 0 and r.raw > 0]
        if not usable:
            raise ConfigError(f"no usable calibration pairs at n={n}")
        mult = margin * max(r.exact / r.raw for r in usable)
        mults[n] = mult
        dists[n] = max(mult * r.raw / r.exact for r in usable)
        samples.extend(rows)
    out = cfg.with_(calib_table=format_table(mults.items()), distortion_table=format_table(dists.items()),
                    calib_floor=floor * max(mults.values()))
    return Calibration(out, samples, mults, dists, floor)


def distortion_summary(pairs):
    """``max / min`` of ``estimate / ed`` over ``(estimate, ed)`` pairs with ed > 0."""
    r = [e / d for e, d in pairs if d > 0 and e > 0]
    if not r:
        return math.inf
    return max(r) / min(r)
