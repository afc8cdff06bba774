"""Pure-numpy fallback for the stepwise-sweep kernels.

Results are required to be identical to the compiled backend up to
floating-point evaluation order; both are exercised by the test suite.
"""

from __future__ import annotations

import numpy as np


def sweep_project(Xw: np.ndarray, norms2: np.ndarray, u: np.ndarray,
                  active: np.ndarray) -> None:
    d = Xw[active] @ u
    Xw[active] -= d[:, None] * u[None, :]
    norms2[active] -= d * d


def best_gain(Xw: np.ndarray, r: np.ndarray, norms2: np.ndarray,
              min_norms2: np.ndarray, active: np.ndarray):
    ok = norms2[active] >= min_norms2[active]
    if not ok.any():
        return -1, 0.0
    idx = active[ok]
    d = Xw[idx] @ r
    g = d * d / norms2[idx]
    # argmax returns the first maximum, and idx is increasing: lowest-index
    # tie-break for free.
    j = int(np.argmax(g))
    return int(idx[j]), float(g[j])
