"""Null simulations of the stepwise procedure.

Under the null the dependent vector is regressed on q pure-noise Gaussian
covariates; every selected covariate is a false positive.  Two equivalent
simulators are provided:

* dense: draws the full n x q design and runs the stepwise sweep.  Accepts
  any fixed y (the law does not depend on it).
* reduced: tracks only the normalized correlation of each candidate with
  the current residual.  Selection at a step depends on the candidate
  directions alone, which stay uniform on the sphere of the shrinking
  orthogonal complement, so the per-step state is one scalar per candidate
  and one step costs O(q) instead of O(nq).  Used for table generation.

Both are exercised against each other in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pvalues import stepwise_gain_threshold
from .regression import Dataset, FitState
from .rng import substream

#: replications per batch are sized so one working array stays ~1e7 entries
_BATCH_ENTRIES = 10_000_000


@dataclass(frozen=True)
class FpHistogram:
    counts: dict[int, float]  # false-positive count -> relative frequency
    mean: float
    sd: float
    nsim: int
    n: int
    q: int
    alpha: float
    nu: int
    seed: int
    method: str
    per_covariate: bool = False

    @classmethod
    def from_counts(cls, fp, n, q, alpha, nu, seed, method, per_covariate=False):
        fp = np.asarray(fp)
        vals, freq = np.unique(fp, return_counts=True)
        counts = {int(v): float(c) / fp.size for v, c in zip(vals, freq)}
        mean = float(fp.mean())
        sd = float(fp.std(ddof=1)) if fp.size > 1 else 0.0
        if per_covariate:
            mean /= q
        return cls(counts, mean, sd, fp.size, n, q, alpha, nu, seed, method, per_covariate)


def _gain_thresholds(n: int, q: int, alpha: float, nu: int) -> np.ndarray:
    """Acceptance thresholds on (rss_k - rss_{k+1}) / rss_k for k = 0, 1, ..."""
    kmax = min(n - 2, q)
    thr = []
    for k in range(kmax):
        nu_k = min(nu, q - k)
        thr.append(stepwise_gain_threshold(n, k, q, nu_k, alpha))
    return np.asarray(thr)


def _null_count_dense(X: np.ndarray, y: np.ndarray, thresholds: np.ndarray) -> int:
    state = FitState(Dataset(y, X))
    k = 0
    while k < len(thresholds) and state.n_remaining > 0 and state.rss > 0.0:
        b, rss_next = state.best_candidate()
        if state.rss - rss_next < thresholds[k] * state.rss:
            break
        state.advance(b)
        k += 1
    return k


def _counts_dense(n, q, alpha, nu, nsim, seed, y=None) -> np.ndarray:
    thresholds = _gain_thresholds(n, q, alpha, nu)
    if y is None:
        y = np.arange(1.0, n + 1.0)
    fp = np.empty(nsim, dtype=np.int64)
    for rep in range(nsim):
        rng = substream(seed, rep)
        X = rng.standard_normal((n, q))
        fp[rep] = _null_count_dense(X, y, thresholds)
    return fp


def _counts_reduced_batch(n, q, thresholds, nsim, rng) -> np.ndarray:
    """One vectorized batch of null runs of the reduced simulator."""
    fp = np.zeros(nsim, dtype=np.int64)
    # Signed cosine of each candidate with the residual direction:
    # first coordinate of a uniform point on the (n-1)-sphere.
    z = rng.standard_normal((nsim, q))
    w = rng.chisquare(n - 1, size=(nsim, q))
    a = z / np.sqrt(z * z + w)
    in_pool = np.ones((nsim, q), dtype=bool)
    rows = np.arange(nsim)
    k = 0
    while k < len(thresholds) and rows.size:
        m = n - k  # dimension of the current orthogonal complement
        if m - 2 <= 0:
            break
        sc = np.where(in_pool[rows], a[rows] * a[rows], -1.0)
        j = np.argmax(sc, axis=1)
        accepted = sc[np.arange(rows.size), j] >= thresholds[k]
        rows = rows[accepted]
        if not rows.size:
            break
        j = j[accepted]
        fp[rows] += 1
        in_pool[rows, j] = False
        # Update every remaining candidate's cosine after projecting the
        # selected direction out of both the candidates and the residual.
        ar = a[rows]
        ab = ar[np.arange(rows.size), j][:, None]
        sb = np.sqrt(np.maximum(1.0 - ab * ab, 0.0))
        z = rng.standard_normal((rows.size, q))
        w = rng.chisquare(m - 2, size=(rows.size, q))
        xi = z / np.sqrt(z * z + w)
        beta = np.sqrt(np.maximum(1.0 - ar * ar, 0.0)) * xi
        c = ar * ab + beta * sb
        denom = np.sqrt(np.clip(1.0 - c * c, 1e-300, None))
        anew = (ar * sb - beta * ab) / denom
        anew[~in_pool[rows]] = 0.0
        a[rows] = anew
        k += 1
    return fp


def _counts_reduced(n, q, alpha, nu, nsim, seed) -> np.ndarray:
    thresholds = _gain_thresholds(n, q, alpha, nu)
    batch = max(1, min(nsim, _BATCH_ENTRIES // q))
    out = []
    for bi, start in enumerate(range(0, nsim, batch)):
        size = min(batch, nsim - start)
        out.append(_counts_reduced_batch(n, q, thresholds, size, substream(seed, bi)))
    return np.concatenate(out)


def simulate_fp(
    n: int,
    q: int,
    alpha: float = 0.01,
    nu: int = 1,
    nsim: int = 1000,
    seed: int = 0,
    per_covariate: bool = False,
    method: str = "auto",
    y: np.ndarray | None = None,
) -> FpHistogram:
    """Distribution of stepwise false-positive counts under the null.

    Deterministic given seed (dense draws use one substream per
    replication, reduced batches are keyed by batch index).  y defaults to
    the ramp 1..n; any nonzero y gives the same law.
    """
    if n < 3 or q < 1 or nsim < 1:
        raise ValueError(f"need n >= 3, q >= 1, nsim >= 1, got {(n, q, nsim)}")
    if method == "auto":
        method = "dense" if n * q <= 250_000 else "reduced"
    if method == "dense":
        fp = _counts_dense(n, q, alpha, nu, nsim, seed, y=y)
    elif method == "reduced":
        if y is not None:
            raise ValueError("the reduced simulator never touches y; pass method='dense'")
        fp = _counts_reduced(n, q, alpha, nu, nsim, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FpHistogram.from_counts(fp, n, q, alpha, nu, seed, method, per_covariate)
