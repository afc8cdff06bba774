"""Backend selection for the hot stepwise kernels.

The compiled extension is used when importable; set GCOVSEL_PURE_PYTHON=1
to force the numpy fallback (the benchmark in benchmarks/ compares both).
"""

from __future__ import annotations

import os

from . import numpy_backend

if os.environ.get("GCOVSEL_PURE_PYTHON"):
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"

sweep_project = _impl.sweep_project
best_gain = _impl.best_gain
