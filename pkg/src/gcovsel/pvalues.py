"""Exact Gaussian P-values for covariate selection.

All probabilities are of the form "k fresh N(0,1) covariates reduce the
residual sum of squares at least as much as the covariate(s) under test"
and evaluate to compositions of Beta distribution functions of rss ratios.
They are exact for any data; no model is assumed.
"""

from __future__ import annotations

import math

from .special import beta_cdf, beta_inv_cdf, f_sf


def _check_ratio(rss: float, rss0: float) -> float:
    if rss0 <= 0.0:
        raise ValueError(f"reference rss must be positive, got {rss0}")
    if rss < 0.0 or rss > rss0 * (1.0 + 1e-12):
        raise ValueError(f"need 0 <= rss <= rss0, got rss={rss}, rss0={rss0}")
    return min(rss / rss0, 1.0)


def pval_joint(rss: float, rss0: float, n: int, k: int, k0: int) -> float:
    """Joint P-value for the k-k0 covariates on top of a nested subset.

    Probability that k-k0 Gaussian replacement covariates added to the
    size-k0 subset (rss0) beat the observed size-k fit (rss).
    """
    if not (0 <= k0 < k < n):
        raise ValueError(f"need 0 <= k0 < k < n, got k0={k0}, k={k}, n={n}")
    r = _check_ratio(rss, rss0)
    return beta_cdf(r, (n - k) / 2.0, (k - k0) / 2.0)


def pval_joint_f(rss: float, rss0: float, n: int, k: int, k0: int) -> float:
    """Same probability through the classical F upper tail (identity route)."""
    if not (0 <= k0 < k < n):
        raise ValueError(f"need 0 <= k0 < k < n, got k0={k0}, k={k}, n={n}")
    r = _check_ratio(rss, rss0)
    if r == 0.0:
        return 0.0
    stat = ((1.0 - r) / (k - k0)) / (r / (n - k))
    return f_sf(stat, k - k0, n - k)


def pval_all_subset(rss_k: float, rss_k_minus_i: float, n: int, k: int, q: int) -> float:
    """P-value of one member of a selected size-k subset, all-subsets form.

    The member and the q-k unselected covariates are all replaced by fresh
    Gaussian ones; this is the probability that the best of those q-k+1
    replacements beats the member.
    """
    if not (1 <= k <= q):
        raise ValueError(f"need 1 <= k <= q, got k={k}, q={q}")
    if n - k <= 0:
        raise ValueError(f"need k < n, got k={k}, n={n}")
    r = _check_ratio(rss_k, rss_k_minus_i)
    u = beta_cdf(r, (n - k) / 2.0, 0.5)
    m = q - k + 1
    if m == 1:
        return u
    return beta_cdf(u, 1.0, float(m))


def pval_stepwise(
    rss_k_plus_b: float,
    rss_k: float,
    n: int,
    k: int,
    q: int,
    nu: int = 1,
    alt_outer: bool = False,
) -> float:
    """P-value of the best remaining candidate at a stepwise step.

    Compares the observed best candidate against the nu-th best of q-k
    fresh Gaussian covariates.  The outer law is Beta(nu, q-k+1-nu), the
    CDF of the nu-th order statistic of q-k uniforms; alt_outer switches to
    the variant with second parameter q-k+2-nu retained for compatibility.
    """
    pool = q - k
    if pool < 1:
        raise ValueError(f"no remaining candidate pool: q={q}, k={k}")
    if not 1 <= nu <= pool:
        raise ValueError(f"order rank nu={nu} outside [1, {pool}]")
    if n - k - 1 <= 0:
        raise ValueError(f"need k < n-1 for a stepwise P-value, got k={k}, n={n}")
    r = _check_ratio(rss_k_plus_b, rss_k)
    u = beta_cdf(r, (n - k - 1) / 2.0, 0.5)
    b_outer = pool + 1 - nu + (1 if alt_outer else 0)
    if nu == 1 and b_outer == 1:
        return u
    return beta_cdf(u, float(nu), float(b_outer))


def stepwise_gain_threshold(
    n: int, k: int, q: int, nu: int, alpha: float, alt_outer: bool = False
) -> float:
    """Minimum normalized rss gain for acceptance at a stepwise step.

    The step test "pval_stepwise <= alpha" is equivalent to
    (rss_k - rss_{k,+b}) / rss_k >= threshold; this returns the threshold.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    pool = q - k
    if pool < 1 or not 1 <= nu <= pool or n - k - 1 <= 0:
        raise ValueError(f"invalid step parameters n={n}, k={k}, q={q}, nu={nu}")
    b_outer = pool + 1 - nu + (1 if alt_outer else 0)
    if nu == 1 and b_outer == 1:
        u = alpha
    else:
        u = beta_inv_cdf(alpha, float(nu), float(b_outer))
    ratio_max = beta_inv_cdf(u, (n - k - 1) / 2.0, 0.5)
    return 1.0 - ratio_max


def kappa(n: int, q: int, alpha: float) -> float:
    """Stepwise termination threshold on |x~_b . r| / ||r||.

    kappa(n, q, alpha)^2 equals the nu=1 gain threshold at k=0: selection
    happens iff the best squared normalized correlation reaches kappa^2.
    """
    if n < 3 or q < 1:
        raise ValueError(f"need n >= 3 and q >= 1, got n={n}, q={q}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    u = math.exp(math.log1p(-alpha) / q)
    return math.sqrt(beta_inv_cdf(u, 0.5, (n - 1) / 2.0))
