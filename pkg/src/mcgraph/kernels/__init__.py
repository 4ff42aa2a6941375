"""Hot numerical kernels with an optional compiled fast path.

The Cython extension is built by setup.py when Cython and a C compiler are
available; otherwise (or when MCGRAPH_PURE_PYTHON=1 is set) the numpy
reference backend is used. Both backends implement identical contracts and
are compared in tests/test_kernels.py and benchmarks/bench_kernels.py.

The masked-cell helpers (gather / scatter / masked_sq_diff) have a single
numpy implementation: fancy indexing is already a compiled loop.
"""

import os

from . import _reference

if os.environ.get("MCGRAPH_PURE_PYTHON", "0") not in ("", "0"):
    _impl = _reference
    BACKEND = "numpy"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _reference
        BACKEND = "numpy"

lap_left = _impl.lap_left
lap_right = _impl.lap_right
dirichlet_rows = _impl.dirichlet_rows
dirichlet_cols = _impl.dirichlet_cols

gather = _reference.gather
scatter = _reference.scatter
masked_sq_diff = _reference.masked_sq_diff


def using_compiled():
    """True when the active Laplacian/Dirichlet backend is the C extension."""
    return BACKEND == "cython"
