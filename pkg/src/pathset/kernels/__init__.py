"""Hot geometry/relaxation kernels with a selectable backend.

The JIT backend (numba) is used by default.  Setting ``PATHSET_PURE_NUMPY=1``
forces the vectorized numpy fallback; the fallback is also used automatically
when numba cannot be imported.  ``benchmarks/bench_kernels.py`` compares the
two implementations head to head.
"""

import os

_FORCE_NUMPY = os.environ.get("PATHSET_PURE_NUMPY", "0") == "1"

if _FORCE_NUMPY:
    from . import numpy_backend as _impl
else:
    try:
        from . import numba_backend as _impl
    except ImportError:
        from . import numpy_backend as _impl

BACKEND = _impl.BACKEND_NAME

point_clearance = _impl.point_clearance
points_clearance = _impl.points_clearance
segment_clearance = _impl.segment_clearance
segments_clearance = _impl.segments_clearance
nearest_index = _impl.nearest_index
radius_indices = _impl.radius_indices
edges_min_crossed_width = _impl.edges_min_crossed_width
body_obstacle_witness = _impl.body_obstacle_witness
relax_springs = _impl.relax_springs
