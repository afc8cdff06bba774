"""Asymptotic stepwise selection for M-regression and nonlinear links.

The exact Gaussian Beta P-values of the linear case are replaced by a
chi-squared approximation of the loss improvement one fresh noise
covariate would achieve; the order-statistic structure survives as the
exponent q-k on the chi-squared CDF.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .regression import Dataset
from .selection import SelectionConfig, SelectionTrace, Step
from .special import chisq_cdf

_M_TOL = 1e-10
_M_MAX_ITER = 500
_SCALE_FLOOR = 1e-12
_LOGIT_CAP = 30.0


class SeparableFitError(ValueError):
    """A logistic fit drove probabilities to 0/1; the P-value is meaningless."""


@dataclass(frozen=True)
class HuberLoss:
    """Huber loss: quadratic up to c, linear beyond; default c = 1."""

    c: float = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("Huber constant c must be positive")

    def rho(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        a = np.abs(u)
        return np.where(a <= self.c, 0.5 * u * u, self.c * a - 0.5 * self.c * self.c)

    def rho1(self, u: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(u, dtype=float), -self.c, self.c)

    def rho2(self, u: np.ndarray) -> np.ndarray:
        # 1 on the closed interval: the seam value stabilizes the curvature
        # sum without affecting anything else (a measure-zero set).
        return (np.abs(np.asarray(u, dtype=float)) <= self.c).astype(float)

    def fisher_factor(self) -> float:
        """c_f = E[rho1(Z)^2] for standard normal Z, cached per c."""
        return _fisher_factor(self.c)


_fisher_cache: dict[float, float] = {}


def _fisher_factor(c: float) -> float:
    if c not in _fisher_cache:
        val, _ = integrate.quad(
            lambda z: min(abs(z), c) ** 2 * stats.norm.pdf(z), -np.inf, np.inf,
            epsabs=1e-12, epsrel=1e-12,
        )
        _fisher_cache[c] = float(val)
    return _fisher_cache[c]


@dataclass
class MState:
    subset: list[int]
    sigma: float
    s0: float             # mean loss at the minimum
    residuals: np.ndarray
    coeffs: np.ndarray
    s0_d1: float          # (1/n) sum rho1(r/sigma)^2
    s0_d2: float          # sum rho2(r/sigma)
    converged: bool


def m_fit(data: Dataset, subset, sigma: float, loss: HuberLoss = HuberLoss()) -> MState:
    """Minimize the mean Huber loss of (y - X_S beta) / sigma over beta.

    Iteratively reweighted least squares; the convex objective decreases
    monotonically and iteration stops at relative change 1e-10 or 500
    rounds (non-convergence is flagged on the state, not raised).
    """
    subset = list(subset)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if len(subset) >= data.n:
        raise ValueError("subset size must be below the sample size")
    y = data.y
    n = data.n
    if not subset:
        r = y
        s0 = float(loss.rho(r / sigma).mean())
        return MState([], sigma, s0, r.copy(), np.empty(0),
                      float((loss.rho1(r / sigma) ** 2).mean()),
                      float(loss.rho2(r / sigma).sum()), True)
    A = data.X[:, subset]
    beta, *_ = np.linalg.lstsq(A, y, rcond=None)  # ls start
    obj = float(loss.rho((y - A @ beta) / sigma).mean())
    converged = False
    for _ in range(_M_MAX_ITER):
        r = y - A @ beta
        u = r / sigma
        # IRLS weights w = rho1(u)/u, constant 1 in the quadratic regime.
        au = np.abs(u)
        w = np.where(au <= loss.c, 1.0, loss.c / np.maximum(au, 1e-300))
        Aw = A * w[:, None]
        beta_new = np.linalg.solve(A.T @ Aw, Aw.T @ y)
        obj_new = float(loss.rho((y - A @ beta_new) / sigma).mean())
        if obj_new > obj + 1e-15:
            # Halve toward the previous iterate until the objective drops.
            step = beta_new - beta
            for _ in range(60):
                step *= 0.5
                obj_new = float(loss.rho((y - A @ (beta + step)) / sigma).mean())
                if obj_new <= obj:
                    break
            beta_new = beta + step
        if abs(obj - obj_new) <= _M_TOL * max(obj, 1e-300):
            beta, obj = beta_new, obj_new
            converged = True
            break
        beta, obj = beta_new, obj_new
    r = y - A @ beta
    u = r / sigma
    return MState(subset, sigma, obj, r, beta,
                  float((loss.rho1(u) ** 2).mean()),
                  float(loss.rho2(u).sum()), converged)


def m_pval(state: MState, s_nu: float, q: int, k: int, all_subset: bool = False) -> float:
    """Asymptotic P-value of a candidate lowering the mean loss to s_nu.

    1 - Chisq_1(2 * s0(rho2) / s0(rho1) * (s0 - s_nu))^(q - k); the
    exponent is the count of competing noise covariates, q-k+1 in the
    all-subsets variant.  The statistic is the squared candidate effect
    on the curvature scale of the loss.
    """
    if s_nu > state.s0 * (1.0 + 1e-12):
        raise ValueError(f"candidate loss {s_nu} exceeds the base loss {state.s0}")
    if k >= q:
        raise ValueError(f"need k < q, got k={k}, q={q}")
    if state.s0_d1 <= 0:
        return 1.0
    stat = 2.0 * state.s0_d2 / state.s0_d1 * max(state.s0 - s_nu, 0.0)
    m = q - k + (1 if all_subset else 0)
    return 1.0 - chisq_cdf(stat, 1.0) ** m


def m_scale_update(state: MState, k: int, loss: HuberLoss = HuberLoss()) -> float:
    """Refreshed scale after a covariate was added (k+1 now in the subset).

    sigma1^2 = sigma0^2 sum rho1(r_i/sigma0)^2 / ((n-k-1) c_f) with the
    Fisher factor c_f = E[rho1(Z)^2] restoring consistency at the normal.
    The sigma0^2 factor makes the update an update of the previous scale
    (dimensionally necessary; in the quadratic limit the right side must
    reduce to rss / (n-k-1)).
    """
    n = state.residuals.shape[0]
    if n - k - 1 < 1:
        raise ValueError(f"need n - k - 1 >= 1, got n={n}, k={k}")
    num = float((loss.rho1(state.residuals / state.sigma) ** 2).sum())
    sigma1 = state.sigma * math.sqrt(num / ((n - k - 1) * loss.fisher_factor()))
    if sigma1 < _SCALE_FLOOR:
        warnings.warn("degenerate residuals; robust scale floored at 1e-12", stacklevel=2)
        return _SCALE_FLOOR
    return sigma1


def initial_scale(y: np.ndarray) -> float:
    """1.4826 times the median absolute deviation of y."""
    y = np.asarray(y, dtype=float)
    return 1.4826 * float(np.median(np.abs(y - np.median(y))))


def m_stepwise(
    data: Dataset, cfg: SelectionConfig = SelectionConfig(), loss: HuberLoss = HuberLoss()
) -> SelectionTrace:
    """Stepwise selection under the Huber loss (asymptotic P-values).

    Mirrors the linear stepwise procedure: at each step every remaining
    candidate is refit, the best mean loss is tested against alpha, and
    the scale is refreshed once per accepted covariate.
    """
    sigma = initial_scale(data.y)
    if sigma < _SCALE_FLOOR:
        warnings.warn("MAD of y is ~0; robust scale floored", stacklevel=2)
        sigma = _SCALE_FLOOR
    q = data.q
    chosen: list[int] = []
    steps: list[Step] = []
    state = m_fit(data, chosen, sigma, loss)
    kmx = min(data.n - 2, q) if cfg.kmx is None else min(cfg.kmx, data.n - 2, q)
    status = "ok"
    while len(chosen) < kmx:
        k = len(chosen)
        best_j, best_state = -1, None
        for j in range(q):
            if j in chosen:
                continue
            cand = m_fit(data, chosen + [j], sigma, loss)
            if best_state is None or cand.s0 < best_state.s0:
                best_j, best_state = j, cand
        if best_state is None:
            break
        p = m_pval(state, best_state.s0, q, k)
        if k >= cfg.kmn and p > cfg.alpha:
            break
        chosen.append(best_j)
        steps.append(Step(best_j, p, best_state.s0))
        sigma = m_scale_update(best_state, k, loss)
        state = m_fit(data, chosen, sigma, loss)
    final_p = []
    for j in chosen:
        drop = m_fit(data, [i for i in chosen if i != j], state.sigma, loss)
        final_p.append(
            m_pval(drop, min(state.s0, drop.s0), q, len(chosen) - 1, all_subset=True)
        )
    return SelectionTrace(steps, chosen, final_p, state.coeffs, state.s0,
                          status, asymptotic=True)


@dataclass
class NonlinState:
    subset: list[int]
    ss0: float            # mean squared residual at the minimum
    residuals: np.ndarray
    coeffs: np.ndarray
    gprime: np.ndarray    # g'(x_i beta) at the fit
    converged: bool


def _gauss_newton(y, A, g, gprime, beta0):
    """Least squares of y on g(A beta) with step halving."""
    beta = np.asarray(beta0, dtype=float).copy()
    eta = A @ beta
    obj = float(((y - g(eta)) ** 2).mean())
    converged = False
    for _ in range(_M_MAX_ITER):
        r = y - g(eta)
        gp = gprime(eta)
        J = A * gp[:, None]
        grad = J.T @ r
        if float(np.abs(grad).max(initial=0.0)) <= _M_TOL:
            converged = True
            break
        JtJ = J.T @ J + 1e-12 * np.eye(A.shape[1])
        step = np.linalg.solve(JtJ, grad)
        improved = False
        for _ in range(60):
            eta_new = A @ (beta + step)
            obj_new = float(((y - g(eta_new)) ** 2).mean())
            if obj_new <= obj:
                improved = True
                break
            step *= 0.5
        if not improved:
            converged = True  # no descent direction left; at the minimum
            break
        beta += step
        eta = A @ beta
        if abs(obj - obj_new) <= _M_TOL * max(obj, 1e-300):
            obj = obj_new
            converged = True
            break
        obj = obj_new
    return beta, eta, obj, converged


def nonlin_fit(data: Dataset, subset, g, gprime, intercept: bool = True) -> NonlinState:
    """Mean-squared-error fit of y ~ g(X_S beta), Gauss-Newton."""
    subset = list(subset)
    n = data.n
    cols = [np.ones(n)] if intercept else []
    cols += [data.X[:, j] for j in subset]
    if not cols:
        r = data.y
        return NonlinState([], float((r * r).mean()), r.copy(), np.empty(0),
                           np.ones(n), True)
    A = np.stack(cols, axis=1)
    beta, eta, obj, conv = _gauss_newton(data.y, A, g, gprime, np.zeros(A.shape[1]))
    r = data.y - g(eta)
    return NonlinState(subset, obj, r, beta, gprime(eta), conv)


def nonlin_pval(state: NonlinState, ss_nu: float, q: int, k: int) -> float:
    """Asymptotic P-value for the nonlinear-link candidate test.

    stat = n (ss0 - ss_nu) sum(g'^2) / sum(r^2 g'^2); ss values are means,
    so the sample-size factor puts the statistic on the chi-squared scale.
    """
    if ss_nu > state.ss0 * (1.0 + 1e-12):
        raise ValueError(f"candidate mse {ss_nu} exceeds the base mse {state.ss0}")
    if k >= q:
        raise ValueError(f"need k < q, got k={k}, q={q}")
    n = state.residuals.shape[0]
    denom = float((state.residuals ** 2 * state.gprime ** 2).sum())
    if denom <= 0:
        return 1.0 if ss_nu >= state.ss0 else 0.0
    num = float((state.gprime ** 2).sum())
    stat = n * max(state.ss0 - ss_nu, 0.0) * num / denom
    return 1.0 - chisq_cdf(stat, 1.0) ** (q - k)


def _logistic(u):
    return 1.0 / (1.0 + np.exp(-np.clip(u, -700, 700)))


def _logistic_prime(u):
    p = _logistic(u)
    return p * (1.0 - p)


def logistic_ratio(y: np.ndarray, p0: np.ndarray) -> float:
    """Variance ratio of the logistic candidate test from fitted p_i(0)."""
    w = p0 * p0 * (1.0 - p0) ** 2
    return float(((y - p0) ** 2 * w).sum() / w.sum())


def logistic_stepwise(data: Dataset, cfg: SelectionConfig = SelectionConfig()) -> SelectionTrace:
    """Stepwise selection for binary y under the logistic link.

    Fits are least squares in probability space (not maximum likelihood)
    with an intercept; candidates are tested by the chi-squared
    approximation.  A fit saturating the link (|logit| > 30) raises
    SeparableFitError naming the candidate.
    """
    y = data.y
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("logistic selection needs y in {0, 1}")
    q = data.q
    chosen: list[int] = []
    steps: list[Step] = []
    state = _logistic_state(data, chosen)
    kmx = min(data.n - 2, q) if cfg.kmx is None else min(cfg.kmx, data.n - 2, q)
    while len(chosen) < kmx:
        k = len(chosen)
        best_j, best_state = -1, None
        for j in range(q):
            if j in chosen:
                continue
            cand = _logistic_state(data, chosen + [j])
            if best_state is None or cand.ss0 < best_state.ss0:
                best_j, best_state = j, cand
        if best_state is None:
            break
        p = _nonlin_logit_pval(y, data, state, best_state, q, k)
        if k >= cfg.kmn and p > cfg.alpha:
            break
        chosen.append(best_j)
        steps.append(Step(best_j, p, best_state.ss0))
        state = best_state
    return SelectionTrace(steps, chosen, [s.pvalue for s in steps],
                          state.coeffs, state.ss0, "ok", asymptotic=True)


def _logistic_state(data: Dataset, subset) -> NonlinState:
    state = nonlin_fit(data, subset, _logistic, _logistic_prime, intercept=True)
    if subset:
        cols = np.concatenate([np.ones((data.n, 1)), data.X[:, list(subset)]], axis=1)
        logits = cols @ state.coeffs
        if np.abs(logits).max() > _LOGIT_CAP:
            raise SeparableFitError(
                f"logistic fit on subset {list(subset)} is (near-)separable"
            )
    return state


def _nonlin_logit_pval(y, data, state, cand_state, q, k) -> float:
    """Candidate P-value using the logistic variance-ratio identity."""
    cols = [np.ones(data.n)] + [data.X[:, j] for j in state.subset]
    if len(state.coeffs):
        p0 = _logistic(np.stack(cols, axis=1) @ state.coeffs)
    else:
        p0 = np.full(data.n, float(y.mean()))
    ratio = logistic_ratio(y, np.clip(p0, 1e-12, 1.0 - 1e-12))
    n = data.n
    stat = n * max(state.ss0 - cand_state.ss0, 0.0) / max(ratio, 1e-300)
    return 1.0 - chisq_cdf(stat, 1.0) ** (q - k)
