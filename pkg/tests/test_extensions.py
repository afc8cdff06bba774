import math

import numpy as np
import pytest

from gcovsel.extensions import (
    HuberLoss,
    MState,
    SeparableFitError,
    initial_scale,
    logistic_ratio,
    logistic_stepwise,
    m_fit,
    m_pval,
    m_scale_update,
    m_stepwise,
    nonlin_fit,
    nonlin_pval,
)
from gcovsel.pvalues import pval_stepwise
from gcovsel.regression import Dataset
from gcovsel.selection import SelectionConfig, f1st


def make_data(n=200, q=6, strong=(0, 2), coef=2.0, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, q))
    y = rng.standard_normal(n)
    for j in strong:
        y = y + coef * X[:, j]
    return Dataset(y, X)


# ---------------------------------------------------------------------------
# Huber loss

def test_huber_seam_continuity():
    h = HuberLoss(1.0)
    eps = 1e-9
    for side in (1.0, -1.0):
        u = side * (1.0 - eps)
        v = side * (1.0 + eps)
        assert h.rho(u) == pytest.approx(h.rho(v), abs=1e-8)
        assert h.rho1(u) == pytest.approx(h.rho1(v), abs=1e-8)
    # rho2 takes the closed-interval value 1 at the seam
    assert h.rho2(1.0) == 1.0 and h.rho2(-1.0) == 1.0
    assert h.rho2(1.0 + 1e-9) == 0.0


def test_huber_shape():
    h = HuberLoss(1.5)
    u = np.linspace(-4, 4, 101)
    r = h.rho(u)
    assert r[50] == 0.0
    assert np.all(np.diff(r[:51]) <= 0) and np.all(np.diff(r[50:]) >= 0)
    assert np.allclose(r, h.rho(-u))  # even


def test_fisher_factor_limits():
    # c -> infinity: E[min(|Z|, c)^2] -> E[Z^2] = 1
    assert HuberLoss(1e6).fisher_factor() == pytest.approx(1.0, abs=1e-9)
    # c = 1: known value E[rho1(Z)^2] < 1
    cf = HuberLoss(1.0).fisher_factor()
    assert 0.5 < cf < 1.0
    # [DERIVED] closed form 1 - 2(1-Phi(1)) + 2(1-Phi(1)) - 2 phi(1) ... via MC
    rng = np.random.default_rng(0)
    z = rng.standard_normal(400_000)
    mc = float((np.clip(z, -1, 1) ** 2).mean())
    assert cf == pytest.approx(mc, abs=3e-3)


# ---------------------------------------------------------------------------
# M-fit

def test_m_fit_quadratic_regime_matches_ls():
    data = make_data()
    sigma = 100.0  # residuals/sigma all inside the quadratic region
    st = m_fit(data, [0, 2], sigma, HuberLoss(1.0))
    beta_ls, *_ = np.linalg.lstsq(data.X[:, [0, 2]], data.y, rcond=None)
    assert st.coeffs == pytest.approx(beta_ls, abs=1e-6)
    assert st.converged


def test_m_fit_large_c_matches_ls():
    data = make_data(seed=3)
    st = m_fit(data, [0, 2], 1.0, HuberLoss(1e6))
    beta_ls, *_ = np.linalg.lstsq(data.X[:, [0, 2]], data.y, rcond=None)
    assert st.coeffs == pytest.approx(beta_ls, rel=1e-6)


def test_m_fit_empty_subset():
    data = make_data()
    st = m_fit(data, [], 2.0)
    loss = HuberLoss(1.0)
    assert st.s0 == pytest.approx(float(loss.rho(data.y / 2.0).mean()))


def test_m_fit_resists_outliers():
    rng = np.random.default_rng(5)
    n = 150
    X = rng.standard_normal((n, 2))
    y_clean = 2.0 * X[:, 0] + 0.5 * rng.standard_normal(n)
    y = y_clean.copy()
    # leverage-aligned gross outliers: these drag least squares upward
    y[:12] += 40.0 * np.sign(X[:12, 0])
    data = Dataset(y, X)
    sigma = initial_scale(y)
    st = m_fit(data, [0], sigma)
    beta_ls, *_ = np.linalg.lstsq(X[:, [0]], y, rcond=None)
    assert abs(st.coeffs[0] - 2.0) < abs(beta_ls[0] - 2.0)


def test_m_fit_monotone_objective():
    # s0 cannot increase when the subset grows (at fixed sigma)
    data = make_data(seed=7)
    s_empty = m_fit(data, [], 1.5).s0
    s_one = m_fit(data, [0], 1.5).s0
    s_two = m_fit(data, [0, 2], 1.5).s0
    assert s_empty >= s_one >= s_two


# ---------------------------------------------------------------------------
# M p-values and scale

def test_m_pval_trivial_no_improvement():
    data = make_data()
    st = m_fit(data, [], 1.0)
    assert m_pval(st, st.s0, q=6, k=0) == pytest.approx(1.0)


def test_m_pval_monotone_in_improvement():
    data = make_data()
    st = m_fit(data, [], 1.0)
    drops = np.linspace(0.0, 0.2 * st.s0, 8)
    ps = [m_pval(st, st.s0 - d, q=6, k=0) for d in drops]
    assert all(a >= b - 1e-15 for a, b in zip(ps, ps[1:]))
    assert all(0.0 <= p <= 1.0 for p in ps)


def test_m_pval_quadratic_limit_matches_exact():
    # large c and matched scale: the chi-squared approximation should be
    # within 10% of the exact Beta step P-value at n=1000; the signal is
    # kept moderate so the compared tails are not vanishingly small, where
    # the chi-squared and Beta tails separate
    rng = np.random.default_rng(11)
    n, q = 1000, 30
    X = rng.standard_normal((n, q))
    y = 0.10 * X[:, 0] + rng.standard_normal(n)
    data = Dataset(y, X)
    loss = HuberLoss(1e6)
    rss0 = float(y @ y)
    sigma = math.sqrt(rss0 / n)
    st0 = m_fit(data, [], sigma, loss)
    best = min(range(q), key=lambda j: m_fit(data, [j], sigma, loss).s0)
    s1 = m_fit(data, [best], sigma, loss).s0
    p_asym = m_pval(st0, s1, q, 0)
    x = data.X[:, best]
    rss1 = float(y @ y - (x @ y) ** 2 / (x @ x))
    p_exact = pval_stepwise(rss1, rss0, n, 0, q)
    assert p_asym == pytest.approx(p_exact, rel=0.10)


def test_m_scale_update_consistency():
    rng = np.random.default_rng(13)
    n = 4000
    sigma_true = 2.5
    X = rng.standard_normal((n, 2))
    y = X @ np.array([1.0, -2.0]) + sigma_true * rng.standard_normal(n)
    data = Dataset(y, X)
    st = m_fit(data, [0, 1], sigma_true)
    sigma1 = m_scale_update(st, k=1)
    assert sigma1 == pytest.approx(sigma_true, rel=0.05)


def test_m_scale_update_quadratic_limit():
    rng = np.random.default_rng(17)
    n = 300
    X = rng.standard_normal((n, 2))
    y = X[:, 0] + rng.standard_normal(n)
    data = Dataset(y, X)
    loss = HuberLoss(1e6)
    st = m_fit(data, [0], 1.0, loss)
    sigma1 = m_scale_update(st, k=0, loss=loss)
    rss = float((st.residuals**2).sum())
    assert sigma1 == pytest.approx(math.sqrt(rss / (n - 1)), rel=1e-6)


def test_initial_scale_two_point():
    assert initial_scale(np.array([-1.0, 1.0, -1.0, 1.0])) == pytest.approx(1.4826)


# ---------------------------------------------------------------------------
# M stepwise

def test_m_stepwise_agrees_with_f1st_on_clean_data():
    agree = 0
    reps = 10
    for seed in range(reps):
        data = make_data(n=500, q=20, strong=(1, 4, 9), coef=1.0, seed=100 + seed)
        ls = sorted(f1st(data, SelectionConfig(kmn=0)).chosen)
        rob = sorted(m_stepwise(data, SelectionConfig(kmn=0)).chosen)
        agree += ls == rob
    assert agree >= 0.9 * reps


def test_m_stepwise_beats_ls_under_contamination():
    wins = 0
    reps = 8
    for seed in range(reps):
        rng = np.random.default_rng(300 + seed)
        n, q = 200, 10
        X = rng.standard_normal((n, q))
        y = 1.2 * X[:, 0] + 1.2 * X[:, 3] + 0.5 * rng.standard_normal(n)
        y[: n // 10] = 50.0 * rng.standard_normal(n // 10)  # 10% gross outliers
        data = Dataset(y, X)
        truth = {0, 3}
        rob = set(m_stepwise(data, SelectionConfig(kmn=0)).chosen)
        ls = set(f1st(data, SelectionConfig(kmn=0)).chosen)
        wins += (rob == truth) and (ls != truth)
    assert wins >= 0.5 * reps


def test_m_stepwise_null_mostly_empty():
    empty = 0
    reps = 20
    for seed in range(reps):
        rng = np.random.default_rng(500 + seed)
        data = Dataset(rng.standard_normal(150), rng.standard_normal((150, 12)))
        tr = m_stepwise(data, SelectionConfig(kmn=0))
        empty += tr.is_empty
    assert empty >= 0.9 * reps


def test_m_stepwise_trace_flags_asymptotic():
    data = make_data()
    tr = m_stepwise(data, SelectionConfig(kmn=0))
    assert tr.asymptotic


# ---------------------------------------------------------------------------
# nonlinear / logistic

def test_nonlin_identity_link_matches_exact():
    rng = np.random.default_rng(19)
    n, q = 1000, 25
    X = rng.standard_normal((n, q))
    y = 0.15 * X[:, 2] + rng.standard_normal(n)
    data = Dataset(y, X)
    ident = lambda u: u
    ident_prime = lambda u: np.ones_like(u)
    st0 = nonlin_fit(data, [], ident, ident_prime, intercept=False)
    cand = nonlin_fit(data, [2], ident, ident_prime, intercept=False)
    p_asym = nonlin_pval(st0, cand.ss0, q, 0)
    rss0 = float(y @ y)
    x = X[:, 2]
    rss1 = float(rss0 - (x @ y) ** 2 / (x @ x))
    p_exact = pval_stepwise(rss1, rss0, n, 0, q)
    assert p_asym == pytest.approx(p_exact, rel=0.10)


def test_nonlin_pval_trivial():
    rng = np.random.default_rng(23)
    data = Dataset(rng.standard_normal(50), rng.standard_normal((50, 4)))
    ident = lambda u: u
    st0 = nonlin_fit(data, [], ident, lambda u: np.ones_like(u), intercept=False)
    assert nonlin_pval(st0, st0.ss0, 4, 0) == pytest.approx(1.0)


def test_logistic_ratio_identity():
    # both sides of the variance-ratio display agree for random fits
    rng = np.random.default_rng(29)
    for _ in range(20):
        n = 200
        y = rng.integers(0, 2, n).astype(float)
        p0 = rng.uniform(0.05, 0.95, n)
        w = p0**2 * (1 - p0) ** 2
        lhs = float(((y - p0) ** 2 * w).sum() / w.sum())
        assert logistic_ratio(y, p0) == pytest.approx(lhs, rel=1e-12)


def test_logistic_selects_predictive_covariate():
    rng = np.random.default_rng(31)
    n, q = 500, 8
    X = rng.standard_normal((n, q))
    p = 1.0 / (1.0 + np.exp(-(0.3 + 1.8 * X[:, 4])))
    y = (rng.uniform(size=n) < p).astype(float)
    data = Dataset(y, X)
    tr = logistic_stepwise(data, SelectionConfig(kmn=0))
    assert tr.chosen and tr.chosen[0] == 4
    assert tr.steps[0].pvalue < 1e-6


def test_logistic_null_mostly_empty():
    empty = 0
    reps = 20
    for seed in range(reps):
        rng = np.random.default_rng(700 + seed)
        y = rng.integers(0, 2, 200).astype(float)
        X = rng.standard_normal((200, 10))
        tr = logistic_stepwise(Dataset(y, X), SelectionConfig(kmn=0))
        empty += tr.is_empty
    assert empty >= 0.9 * reps


def test_logistic_requires_binary_y():
    rng = np.random.default_rng(37)
    data = Dataset(rng.standard_normal(50), rng.standard_normal((50, 3)))
    with pytest.raises(ValueError, match="binary|\\{0, 1\\}"):
        logistic_stepwise(data)


def test_logistic_separable_fit_raises():
    n = 80
    x = np.linspace(-3, 3, n)
    y = (x > 0).astype(float)  # perfectly separable
    rng = np.random.default_rng(41)
    X = np.stack([x, rng.standard_normal(n)], axis=1)
    with pytest.raises(SeparableFitError):
        logistic_stepwise(Dataset(y, X), SelectionConfig(kmn=0))


def test_intercept_only_logistic_probability():
    rng = np.random.default_rng(43)
    y = (rng.uniform(size=300) < 0.3).astype(float)
    X = rng.standard_normal((300, 2))
    data = Dataset(y, X)
    st = nonlin_fit(data, [],
                    lambda u: 1.0 / (1.0 + np.exp(-u)),
                    lambda u: np.exp(-u) / (1.0 + np.exp(-u)) ** 2,
                    intercept=True)
    p_hat = 1.0 / (1.0 + math.exp(-st.coeffs[0]))
    assert p_hat == pytest.approx(float(y.mean()), abs=1e-6)
