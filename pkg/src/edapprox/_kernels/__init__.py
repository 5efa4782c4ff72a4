"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version in :mod:`._numba` and a
vectorised numpy fallback in :mod:`._numpy`.  The numba path is used when
numba imports cleanly and ``EDAPPROX_NUMBA`` is not set to ``0``.
Both paths compute identical integers (hashes, cells); floating outputs agree
up to summation order.
"""
import os

from . import _numpy

_flag = os.environ.get("EDAPPROX_NUMBA", "1").strip().lower()

try:
    if _flag in ("0", "false", "no", "off"):
        raise ImportError("numba disabled by EDAPPROX_NUMBA")
    from . import _numba as _impl
    BACKEND = "numba"
except ImportError:
    _impl = _numpy
    BACKEND = "numpy"

edit_distance = _impl.edit_distance
banded_edit_distance = _impl.banded_edit_distance
substring_keys = _impl.substring_keys
hash_bits = _impl.hash_bits
grid_cells = _impl.grid_cells
cauchy_columns = _impl.cauchy_columns
singleton_sketches = _impl.singleton_sketches
sliding_sums = _impl.sliding_sums
forest_keys = _impl.forest_keys
multi_source_dijkstra = _impl.multi_source_dijkstra

__all__ = [
    "BACKEND",
    "edit_distance",
    "banded_edit_distance",
    "substring_keys",
    "hash_bits",
    "grid_cells",
    "cauchy_columns",
    "singleton_sketches",
    "sliding_sums",
    "forest_keys",
    "multi_source_dijkstra",
]
