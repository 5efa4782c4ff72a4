"""Run configuration: every tunable constant in one flat, hashable record."""
from dataclasses import dataclass, fields, replace
import hashlib
import math

import numpy as np

from .errors import ConfigError

# fields where 0 means "derive automatically"
_ZERO_OK = {"branching", "s_min_exp", "reduce_forest_reps", "bourgain_reps_cap", "bourgain_max_exp",
            "match_reps", "gap_reps", "threads", "calib_floor", "reduce_quantile", "level_quantile"}
_CHOICES = {
    "level_calibration": ("shift", "none"),
    "reduce_normalize": ("measured", "nominal"),
    "output_format": ("text", "json"),
    "alphabet": ("binary", "bytes"),
}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    # recursion
    branching: int = 0
    c_norm: float = 12.0
    s_min_exp: int = 0
    base_dim: int = 64
    quant_bits: int = 20
    level_calibration: str = "shift"
    level_quantile: float = 0.1
    calib_offsets: int = 7
    calib_samples: int = 6
    # sliding-window sketch
    sketch_c_proj: float = 4.0
    sketch_proj_cap: int = 32
    sketch_c_reps: float = 2.0
    sketch_reps_cap: int = 4
    sketch_c_scale: float = 0.0625
    sketch_copies: int = 1
    # min-product to l1
    reduce_forest_reps: int = 1
    reduce_gamma_exp: float = 3.0
    reduce_normalize: str = "measured"
    reduce_quantile: float = 0.02
    bourgain_c_reps: float = 1.0
    bourgain_reps_cap: int = 2
    bourgain_max_exp: int = 8
    top_boost: int = 4
    # output calibration
    calib_multiplier: float = 1.0
    # fitted by `edapprox calibrate --sizes 1024,2048,4096 --pairs 3` with seed 0
    calib_table: str = "1024:3.172401805501084,2048:6.067510260241681,4096:10.541940135779775"
    calib_floor: float = 0.0
    distortion_table: str = "1024:25.058855720897107,2048:26.174841136955123,4096:31.91658790360762"
    # applications
    gap_c_samples: float = 1.0
    gap_c_threshold: float = 0.45
    gap_reps: int = 3
    match_reps: int = 0
    # plumbing
    oracle_cap: int = 4096
    max_n: int = 1 << 22
    threads: int = 1
    alphabet: str = "binary"
    output_format: str = "text"

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name in _CHOICES:
                if val not in _CHOICES[f.name]:
                    raise ConfigError(f"{f.name} must be one of {_CHOICES[f.name]}, got {val!r}")
            elif f.type in ("int", "float", int, float):
                if f.name == "seed":
                    if not 0 <= val < 1 << 64:
                        raise ConfigError("seed must fit in 64 bits")
                elif val < 0 or (val == 0 and f.name not in _ZERO_OK):
                    raise ConfigError(f"{f.name} must be positive, got {val!r}")
        if self.level_quantile >= 1 or self.reduce_quantile >= 1:
            raise ConfigError("quantiles must lie in [0, 1)")
        _parse_table(self.distortion_table)
        _parse_table(self.calib_table)

    def with_(self, **kw):
        return replace(self, **kw)

    # serialisation
    def dumps(self):
        return "".join(f"{f.name}={_fmt(getattr(self, f.name))}\n" for f in fields(self))

    @classmethod
    def loads(cls, text, base=None):
        base = base or cls()
        kinds = {f.name: f.type for f in fields(cls)}
        updates = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value")
            key, val = (p.strip() for p in line.split("=", 1))
            if key not in kinds:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            updates[key] = _coerce(key, kinds[key], val)
        return replace(base, **updates)

    @classmethod
    def load(cls, path, base=None):
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.loads(fh.read(), base)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    def config_hash(self):
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]

    def multiplier(self, n):
        """Non-contraction multiplier at length n (table, else ``calib_multiplier``)."""
        val = table_value(_parse_table(self.calib_table), n)
        return self.calib_multiplier if val is None else val

    def distortion(self, n):
        """Empirical distortion F_emp at length n, or None when never calibrated."""
        return table_value(_parse_table(self.distortion_table), n)


def table_value(table, n):
    """Piecewise power law through ``(n, value)`` points, extended by the end segments."""
    if not table:
        return None
    if len(table) == 1:
        return table[0][1]
    ks = np.log([k for k, _ in table])
    vs = np.log([v for _, v in table])
    x = math.log(max(1, n))
    seg = int(np.clip(np.searchsorted(ks, x) - 1, 0, len(ks) - 2))
    slope = (vs[seg + 1] - vs[seg]) / (ks[seg + 1] - ks[seg])
    return float(math.exp(vs[seg] + slope * (x - ks[seg])))


def _fmt(val):
    return repr(val) if isinstance(val, float) else str(val)


def _coerce(key, kind, val):
    try:
        if kind in ("int", int):
            return int(val, 0)
        if kind in ("float", float):
            return float(val)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {val!r}") from exc
    return val


def _parse_table(text):
    if not text:
        return []
    out = []
    try:
        for item in text.split(","):
            k, v = item.split(":")
            out.append((int(k), float(v)))
            if out[-1][0] < 1 or not out[-1][1] > 0:
                raise ValueError(item)
    except ValueError as exc:
        raise ConfigError(f"tables look like 2048:12.5,4096:14 with positive values, got {text!r}") from exc
    return sorted(out)


def format_table(pairs):
    return ",".join(f"{int(k)}:{float(v)!r}" for k, v in sorted(pairs))
