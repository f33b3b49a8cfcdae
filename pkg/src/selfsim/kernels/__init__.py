"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time:

* ``SELFSIM_KERNELS=numpy`` forces the numpy fallback;
* otherwise numba is used when it imports cleanly.

``SELFSIM_THREADS`` caps numba's thread pool.  Both backends expose the same
functions and are expected to agree to rounding (see ``tests/test_kernels.py``).
"""
from __future__ import annotations

import os

from . import _numpy

BACKEND = "numpy"
_impl = _numpy

if os.environ.get("SELFSIM_KERNELS", "").lower() != "numpy":
    # the bundled TBB is often too old; workqueue needs nothing extra
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    try:
        from . import _numba

        _impl = _numba
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if BACKEND == "numba" and os.environ.get("SELFSIM_THREADS"):
    import numba

    numba.set_num_threads(max(1, min(int(os.environ["SELFSIM_THREADS"]), numba.config.NUMBA_NUM_THREADS)))

word_images = _impl.word_images
min_sq_dist = _impl.min_sq_dist
spectral_norms = _impl.spectral_norms
block_matmul = _impl.block_matmul
lowrank_dense = _impl.lowrank_dense
blockdiag_lowrank = _impl.blockdiag_lowrank

__all__ = ["BACKEND", "word_images", "min_sq_dist", "spectral_norms", "block_matmul",
           "lowrank_dense", "blockdiag_lowrank"]
