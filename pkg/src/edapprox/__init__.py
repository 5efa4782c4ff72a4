"""Near-linear-time edit distance approximation.

The estimator embeds substrings level by level: thresholded EMD over
windows of lower-level vectors is sketched into a min-product of l1's,
reduced to plain l1 through star forests and a Bourgain embedding of their
union graph, and concatenated into the next level's vectors.

Kernels run under numba by default; set ``EDAPPROX_NUMBA=0`` before import
for the pure-numpy path.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .applications import CLOSE, FAR, GapSpec, MatchResult, gap_distinguish, pattern_match
from .config import RunConfig
from .driver import (
    Estimate,
    LengthSet,
    LevelVectorSet,
    approx_edit_distance,
    base_level_vectors,
    build_length_set,
    estimate_edit_distance,
    level_vectors,
)
from .errors import ConfigError, DependencyError, EdApproxError, InvalidInputError
from .metric_reduce import (
    BourgainParams,
    StarForest,
    WeightedGraph,
    bourgain_embed,
    forests_to_graph,
    minprod_to_star_forests,
    quantize_minproduct,
    reduce_minprod_to_l1,
)
from .oracles import (
    BitString,
    MinProductPoint,
    PointSet,
    exact_edit_distance,
    ideal_distance_exact,
    min_product_distance,
    sum_product_distance,
    temd_exact,
)
from .temd_embed import (
    GridSketchParams,
    cauchy_column,
    grid_embed_singleton,
    minproduct_sketch,
    sliding_window_sketch,
)

__all__ = [name for name in dir() if not name.startswith("_")]
