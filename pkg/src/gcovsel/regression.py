"""Least-squares engine with incremental orthogonalization.

A stepwise path keeps one working copy of the design in which every
remaining candidate column has been projected orthogonal to the selected
span.  Evaluating all q candidates at a step is then a single O(nq) sweep,
delegated to the kernel backend (compiled or numpy, see gcovsel.kernels).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

#: A candidate is dropped as linearly dependent when the squared norm of its
#: component orthogonal to the selected span falls below this fraction of its
#: original squared norm (scale-free rank test).
COLLINEAR_TOL = 1e-10


class CollinearityError(ValueError):
    """Raised when a requested column is (numerically) in the current span."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"column {index} is collinear with the current subset")


@dataclass
class Dataset:
    """Dependent vector plus design matrix with column labels.

    When has_intercept is set, y and the columns of X are centered once up
    front; all downstream rss values then refer to the centered problem.
    """

    y: np.ndarray
    X: np.ndarray
    names: list[str] = field(default_factory=list)
    has_intercept: bool = False

    def __post_init__(self):
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.y.ndim != 1 or self.X.ndim != 2:
            raise ValueError("y must be a vector and X a matrix")
        n, q = self.X.shape
        if self.y.shape[0] != n:
            raise ValueError(f"y has length {self.y.shape[0]} but X has {n} rows")
        if n < 2 or q < 1:
            raise ValueError(f"need n >= 2 and q >= 1, got n={n}, q={q}")
        if not (np.isfinite(self.y).all() and np.isfinite(self.X).all()):
            raise ValueError("dataset contains non-finite entries")
        if not self.names:
            self.names = [f"x{i + 1}" for i in range(q)]
        elif len(self.names) != q:
            raise ValueError("number of column names does not match X")
        if self.has_intercept:
            self.y = self.y - self.y.mean()
            self.X = self.X - self.X.mean(axis=0)
        norms = np.einsum("ij,ij->j", self.X, self.X)
        if (norms == 0.0).any():
            dead = int(np.argmin(norms))
            raise ValueError(f"column {dead} ({self.names[dead]}) is identically zero")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def q(self) -> int:
        return self.X.shape[1]


class FitState:
    """Mutable state of one stepwise path over a Dataset.

    Single-owner: advance() mutates in place.  Candidate columns live in a
    (q, n) working array progressively orthogonalized against the selected
    span, so each step costs O(nq).
    """

    def __init__(self, data: Dataset, candidates: np.ndarray | None = None):
        self.data = data
        self.selected: list[int] = []
        self.residual = data.y.copy()
        self.rss = float(self.residual @ self.residual)
        self._Xw = np.ascontiguousarray(data.X.T)
        self._norms2 = np.einsum("ij,ij->i", self._Xw, self._Xw)
        self._min_norms2 = COLLINEAR_TOL * self._norms2
        if candidates is None:
            candidates = np.arange(data.q)
        self._active = np.asarray(sorted(candidates), dtype=np.int64)

    @property
    def k(self) -> int:
        return len(self.selected)

    @property
    def n_remaining(self) -> int:
        return len(self._active)

    def admissible(self, index: int) -> bool:
        return (
            index in self._active
            and self._norms2[index] >= self._min_norms2[index]
        )

    def best_candidate(self) -> tuple[int, float]:
        """(index, rss after adding it) of the best remaining candidate.

        The gain of candidate i is (x~_i . r)^2 / ||x~_i||^2 with x~_i the
        projected column; ties break to the lowest index.  Raises
        CollinearityError(-1) when nothing admissible remains.
        """
        j, gain = kernels.best_gain(
            self._Xw, self.residual, self._norms2, self._min_norms2, self._active
        )
        if j < 0:
            raise CollinearityError(-1, "no admissible candidate remains")
        return j, max(self.rss - gain, 0.0)

    def candidate_rss(self, index: int) -> float:
        """rss that adding one given candidate would produce."""
        if not self.admissible(index):
            raise CollinearityError(index)
        d = float(self._Xw[index] @ self.residual)
        return max(self.rss - d * d / self._norms2[index], 0.0)

    def advance(self, index: int) -> "FitState":
        if not self.admissible(index):
            raise CollinearityError(index)
        u = self._Xw[index] / np.sqrt(self._norms2[index])
        d = float(u @ self.residual)
        self.residual -= d * u
        self.rss = max(self.rss - d * d, 0.0)
        self.selected.append(index)
        self._active = self._active[self._active != index]
        kernels.sweep_project(self._Xw, self._norms2, u, self._active)
        return self

    def coefficients(self) -> np.ndarray:
        """Least-squares coefficients over the selected columns, in order."""
        if not self.selected:
            return np.empty(0)
        A = self.data.X[:, self.selected]
        beta, *_ = np.linalg.lstsq(A, self.data.y, rcond=None)
        return beta


def fit_ls(data: Dataset, subset) -> FitState:
    """Least squares of y on the given distinct columns.

    Rank deficiency surfaces as CollinearityError carrying the offending
    column index; the caller decides whether to drop it or abort.
    """
    subset = list(subset)
    if len(set(subset)) != len(subset):
        raise ValueError("subset indices must be distinct")
    if len(subset) >= data.n:
        raise ValueError("subset size must be below the sample size")
    state = FitState(data)
    for j in subset:
        state.advance(j)
    return state


def rss_of(data: Dataset, subset) -> float:
    return fit_ls(data, subset).rss


def rss_drop_one(data: Dataset, subset, i: int) -> float:
    """rss of the subset with member i removed."""
    subset = list(subset)
    if i not in subset:
        raise ValueError(f"column {i} is not in the subset")
    return fit_ls(data, [j for j in subset if j != i]).rss


def subset_rss_lattice(data: Dataset, cols: list[int]) -> dict[int, float]:
    """rss of every subset of cols, keyed by bitmask over positions in cols.

    Works on the (k+1) x (k+1) Gram matrix of [X_cols | y], so the cost per
    subset is O(k^3) independent of n.  Intended for the terminal
    all-subsets pass where k stays small.
    """
    k = len(cols)
    A = np.concatenate([data.X[:, cols], data.y[:, None]], axis=1)
    G = A.T @ A
    gyy = G[k, k]
    out = {0: float(gyy)}
    for mask in range(1, 1 << k):
        pos = [p for p in range(k) if mask >> p & 1]
        Gss = G[np.ix_(pos, pos)]
        gsy = G[pos, k]
        try:
            c = np.linalg.solve(Gss, gsy)
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(Gss, gsy, rcond=None)
            c = sol
        out[mask] = float(max(gyy - gsy @ c, 0.0))
    return out
