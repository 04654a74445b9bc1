"""Hot numerical kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``NCTVEM_DISABLE_NUMBA`` is set to a truthy value (``1``,
``true``, ``yes``). Both implementations stay importable as
``kernels.numpy_impl`` and ``kernels.numba_impl`` (the latter is ``None``
without numba) so benchmarks and tests can compare them directly.
"""

import os

from . import _numpy as numpy_impl

_DISABLED = os.environ.get("NCTVEM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    from . import _numba as numba_impl
except ImportError:  # numba missing or broken
    numba_impl = None

BACKEND = "numba" if (numba_impl is not None and not _DISABLED) else "numpy"
_impl = numba_impl if BACKEND == "numba" else numpy_impl

clip_halfplane = _impl.clip_halfplane
voronoi_cells = _impl.voronoi_cells
polygon_osc_integrals = _impl.polygon_osc_integrals
bessel_j0y0j1y1 = _impl.bessel_j0y0j1y1

__all__ = [
    "BACKEND",
    "bessel_j0y0j1y1",
    "clip_halfplane",
    "numba_impl",
    "numpy_impl",
    "polygon_osc_integrals",
    "voronoi_cells",
]
