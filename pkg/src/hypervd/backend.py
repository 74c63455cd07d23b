"""Kernel backend selection.

The hot manifold kernels exist twice: a Cython extension (``hypervd._kernels``)
and a pure-numpy fallback (``hypervd._kernels_py``). The compiled one is
preferred when importable; set HYPERVD_PURE_PYTHON=1 to force the fallback.
``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _kernels_py

if os.environ.get("HYPERVD_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

lift_fwd = _impl.lift_fwd
lift_bwd = _impl.lift_bwd
pairwise_geodesic_fwd = _impl.pairwise_geodesic_fwd
pairwise_geodesic_bwd = _impl.pairwise_geodesic_bwd
timelike_normalize_fwd = _impl.timelike_normalize_fwd
timelike_normalize_bwd = _impl.timelike_normalize_bwd
masked_row_softmax_fwd = _impl.masked_row_softmax_fwd
masked_row_softmax_bwd = _impl.masked_row_softmax_bwd


def backend_name():
    """Which kernel implementation is active: 'compiled' or 'python'."""
    return BACKEND
