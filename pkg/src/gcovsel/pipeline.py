"""Data ingestion, lag matrices, standardization and synthetic designs.

The generators reproduce the simulation designs used throughout the
package: Toeplitz-correlated Gaussian regression, random-graph Gaussian
samples, pure-noise nulls and orthonormal designs for consistency checks.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .regression import Dataset
from .rng import substream


@dataclass(frozen=True)
class LagSpec:
    max_lag: int
    series_names: list[str]
    target: str

    def __post_init__(self):
        if self.max_lag < 1:
            raise ValueError("max_lag must be positive")
        if self.target not in self.series_names:
            raise ValueError(f"target {self.target!r} not among the series")


@dataclass(frozen=True)
class SimDesign:
    kind: str  # toeplitz | random_graph | null | orthonormal
    n: int
    q: int
    rho: float = 0.0
    p_active: int = 0
    amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("toeplitz", "random_graph", "null", "orthonormal"):
            raise ValueError(f"unknown design kind {self.kind!r}")
        if not abs(self.rho) < 1:
            raise ValueError("|rho| must be < 1")
        if not 0 <= self.p_active <= self.q:
            raise ValueError("p_active must lie in [0, q]")


@dataclass(frozen=True)
class GenResult:
    data: Dataset
    truth: frozenset[int]  # active column indices; empty for graph designs
    truth_edges: frozenset[tuple[int, int]] = frozenset()


@dataclass(frozen=True)
class Standardization:
    """Column means and scales removed by standardize, for back-mapping."""

    y_mean: float
    x_means: np.ndarray
    x_scales: np.ndarray

    def back_map(self, coeffs: np.ndarray, subset) -> np.ndarray:
        """Coefficients on the original column scales."""
        return np.asarray(coeffs, dtype=float) / self.x_scales[list(subset)]


def load_csv(path, y_column, strict: bool = False) -> Dataset:
    """Read a rectangular numeric CSV with header into a Dataset.

    y_column picks the dependent column by header name or 0-based index.
    Rows with empty or NA cells are dropped with a warning (error under
    strict); any other non-numeric cell is an error naming its position.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = list(reader)
    header = [h.strip() for h in header]
    if isinstance(y_column, int):
        if not 0 <= y_column < len(header):
            raise ValueError(f"y column index {y_column} out of range")
        y_idx = y_column
    else:
        try:
            y_idx = header.index(y_column)
        except ValueError:
            raise ValueError(
                f"y column {y_column!r} not in header {header}"
            ) from None

    na_tokens = {"", "na", "nan", "n/a", "null"}
    parsed = []
    dropped = 0
    for r, row in enumerate(rows, start=2):  # header is line 1
        if len(row) != len(header):
            raise ValueError(f"{path}: line {r} has {len(row)} cells, expected {len(header)}")
        vals = []
        missing = False
        for c, cell in enumerate(row):
            s = cell.strip()
            if s.lower() in na_tokens:
                missing = True
                break
            try:
                vals.append(float(s))
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell {s!r} at line {r}, column {header[c]!r}"
                ) from None
        if missing:
            if strict:
                raise ValueError(f"{path}: missing value at line {r}")
            dropped += 1
            continue
        parsed.append(vals)
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} row(s) with missing values", stacklevel=2)
    if not parsed:
        raise ValueError(f"{path}: no usable data rows")
    M = np.asarray(parsed)
    y = M[:, y_idx]
    X = np.delete(M, y_idx, axis=1)
    names = [h for i, h in enumerate(header) if i != y_idx]
    return Dataset(y, X, names=names)


def make_lags(series: np.ndarray, spec: LagSpec) -> Dataset:
    """Lag design: y_t regressed on lags 1..max_lag of every series.

    Columns are series-major, lag-minor, with the target series first:
    columns 0..L-1 are target lags 1..L, the next L columns are the first
    non-target series, and so on.  Row t carries values at t-1..t-L, so
    the usable sample shrinks by max_lag rows.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim == 1:
        series = series[:, None]
    T, s = series.shape
    if s != len(spec.series_names):
        raise ValueError(f"matrix has {s} series but spec names {len(spec.series_names)}")
    L = spec.max_lag
    if L >= T:
        raise ValueError(f"max_lag={L} must be below the series length {T}")
    t_idx = spec.series_names.index(spec.target)
    order = [t_idx] + [i for i in range(s) if i != t_idx]
    cols = []
    names = []
    for si in order:
        for lag in range(1, L + 1):
            cols.append(series[L - lag : T - lag, si])
            names.append(f"{spec.series_names[si]}_lag{lag}")
    X = np.stack(cols, axis=1)
    y = series[L:, t_idx]
    return Dataset(y, X, names=names)


def _toeplitz_rows(rng, n: int, q: int, rho: float) -> np.ndarray:
    """n i.i.d. rows with covariance rho^|i-j| by the AR(1) recursion."""
    X = rng.standard_normal((n, q))
    if rho:
        scale = math.sqrt(1.0 - rho * rho)
        for j in range(1, q):
            X[:, j] = rho * X[:, j - 1] + scale * X[:, j]
    return X


def random_graph_truth(q: int, rng) -> tuple[np.ndarray, frozenset[tuple[int, int]]]:
    """Random geometric-style graph: nodes uniform on the unit square,
    an edge with probability equal to the standard normal density at
    23.5 times the node distance.  Returns node positions and edges."""
    pos = rng.uniform(size=(q, 2))
    d = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1))
    p_edge = np.exp(-0.5 * (23.5 * d) ** 2) / math.sqrt(2.0 * math.pi)
    upper = np.triu(rng.uniform(size=(q, q)) < p_edge, k=1)
    edges = frozenset(
        (int(i), int(j)) for i, j in zip(*np.nonzero(upper))
    )
    return pos, edges


def _graph_sample(rng, n: int, q: int, edges) -> np.ndarray:
    """Gaussian sample whose conditional-dependence graph is `edges`.

    The precision matrix is I + c A with A the adjacency matrix; c is
    shrunk if needed to keep it comfortably positive definite, so every
    edge corresponds to a nonzero partial correlation.
    """
    A = np.zeros((q, q))
    for i, j in edges:
        A[i, j] = A[j, i] = 1.0
    c = 0.35
    if len(edges):
        lam_min = float(np.linalg.eigvalsh(A)[0])
        if lam_min < 0 and c * (-lam_min) > 0.9:
            c = 0.9 / (-lam_min)
    omega = np.eye(q) + c * A
    L = np.linalg.cholesky(omega)
    Z = rng.standard_normal((n, q))
    # X ~ N(0, omega^{-1}): solve L^T X^T = Z^T.
    return np.linalg.solve(L.T, Z.T).T


def gen_design(design: SimDesign) -> GenResult:
    """Deterministic synthetic dataset with its ground truth.

    toeplitz: rows N(0, Sigma), Sigma_ij = rho^|i-j|; the first p_active
    columns carry coefficient amplitude/sqrt(n); unit Gaussian noise.
    random_graph: graph-structured Gaussian sample, truth is the edge set
    (y is a decoy noise vector, unused by graph estimation).
    null: pure noise X and y.
    orthonormal: X = sqrt(n) * Q (orthonormal columns scaled to norm
    sqrt(n)), first p_active columns active with the given amplitude as
    the raw coefficient.
    """
    rng = substream(design.seed, 0)
    n, q = design.n, design.q
    if design.kind == "toeplitz":
        # Active covariates are scattered at random over the q positions;
        # contiguous actives would reinforce each other through the
        # Toeplitz correlation and distort the detection difficulty.
        active = rng.choice(q, size=design.p_active, replace=False)
        X = _toeplitz_rows(rng, n, q, design.rho)
        beta = np.zeros(q)
        beta[active] = design.amplitude / math.sqrt(n)
        y = X @ beta + rng.standard_normal(n)
        return GenResult(Dataset(y, X), frozenset(int(i) for i in active))
    if design.kind == "null":
        X = rng.standard_normal((n, q))
        y = rng.standard_normal(n)
        return GenResult(Dataset(y, X), frozenset())
    if design.kind == "orthonormal":
        if q > n:
            raise ValueError("orthonormal design needs q <= n")
        Q, _ = np.linalg.qr(rng.standard_normal((n, q)))
        X = math.sqrt(n) * Q
        beta = np.zeros(q)
        beta[: design.p_active] = design.amplitude
        y = X @ beta + rng.standard_normal(n)
        return GenResult(Dataset(y, X), frozenset(range(design.p_active)))
    # random_graph
    _, edges = random_graph_truth(q, rng)
    X = _graph_sample(rng, n, q, edges)
    y = rng.standard_normal(n)
    return GenResult(Dataset(y, X), frozenset(), edges)


def standardize(data: Dataset) -> tuple[Dataset, Standardization]:
    """Center y, make every column of X mean zero and variance one."""
    sds = data.X.std(axis=0, ddof=0)
    flat = np.nonzero(sds == 0.0)[0]
    if flat.size:
        j = int(flat[0])
        raise ValueError(f"column {j} ({data.names[j]}) is constant; cannot standardize")
    x_means = data.X.mean(axis=0)
    y_mean = float(data.y.mean())
    X = (data.X - x_means) / sds
    y = data.y - y_mean
    return (
        Dataset(y, X, names=list(data.names)),
        Standardization(y_mean, x_means, sds),
    )
