"""Approximation regions and per-coefficient intervals.

A coefficient vector is an acceptable approximation at level alpha when
fresh Gaussian covariates beat its fit with probability at least alpha;
the resulting sets coincide numerically with classical confidence sets
but require no model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regression import Dataset, fit_ls
from .special import beta_inv_cdf

_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class ApproxRegion:
    rss_ls: float
    radius_rss: float
    n: int
    k: int
    alpha: float
    center: np.ndarray  # least-squares coefficients
    gram: np.ndarray    # X_S^T X_S, the ellipsoid shape matrix

    def contains(self, beta, data: Dataset, subset) -> bool:
        r = data.y - data.X[:, list(subset)] @ np.asarray(beta, dtype=float)
        return float(r @ r) <= self.radius_rss


@dataclass(frozen=True)
class ApproxInterval:
    center: float
    half_width: float
    sigma_k_sq: float
    alpha: float

    @property
    def lo(self) -> float:
        return self.center - self.half_width

    @property
    def hi(self) -> float:
        return self.center + self.half_width


def region(data: Dataset, subset, alpha: float) -> ApproxRegion:
    """alpha-approximation region for the coefficients of one subset.

    Membership is the rss inequality ||y - X beta||^2 <= radius_rss with
    radius_rss = rss_ls / BetaInv(alpha; (n-k)/2, k/2); the ellipsoid form
    (center, Gram shape) is carried along for export.
    """
    subset = list(subset)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    k = len(subset)
    n = data.n
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    state = fit_ls(data, subset)
    radius = state.rss / beta_inv_cdf(alpha, (n - k) / 2.0, k / 2.0)
    A = data.X[:, subset]
    return ApproxRegion(state.rss, radius, n, k, alpha, state.coefficients(), A.T @ A)


def interval(data: Dataset, subset, which: int, alpha: float) -> ApproxInterval:
    """alpha-approximation interval for the coefficient of one subset member.

    half_width^2 = (rss_ls / s_k^2) (1 / BetaInv(alpha; (n-k)/2, 1/2) - 1)
    where s_k^2 is the squared norm of the member's component orthogonal to
    the other selected columns; refitting with the coefficient offset by
    lambda raises the rss by exactly lambda^2 s_k^2.
    """
    subset = list(subset)
    if which not in subset:
        raise ValueError(f"column {which} is not in the subset")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    k = len(subset)
    n = data.n
    state = fit_ls(data, subset)
    others = [j for j in subset if j != which]
    xk = data.X[:, which]
    if others:
        B = data.X[:, others]
        proj, *_ = np.linalg.lstsq(B, xk, rcond=None)
        resid = xk - B @ proj
    else:
        resid = xk
    sigma_k_sq = float(resid @ resid)
    if sigma_k_sq <= _PIVOT_TOL * float(xk @ xk):
        raise ValueError(
            f"column {which} ({data.names[which]}) is nearly collinear with "
            "the rest of the subset; no finite interval"
        )
    shrink = beta_inv_cdf(alpha, (n - k) / 2.0, 0.5)
    half_width = float(np.sqrt(state.rss / sigma_k_sq * (1.0 / shrink - 1.0)))
    center = float(state.coefficients()[subset.index(which)])
    return ApproxInterval(center, half_width, sigma_k_sq, alpha)
