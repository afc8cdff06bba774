"""The four covariate-selection procedures.

f1st   stepwise selection with optional forced inclusion and a terminal
       all-subsets refinement of the selected set
f2st   repeated f1st, excluding each round's selection wholesale
f3st   repeated f1st, excluding selected covariates one at a time to a
       given depth, yielding alternative approximations
fasb   all-subsets enumeration keeping maximal qualifying subsets
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .pvalues import pval_all_subset, pval_stepwise
from .regression import CollinearityError, Dataset, FitState, subset_rss_lattice

_RSS_FLOOR = 1e-12  # relative to ||y||^2; below this the fit is saturated


@dataclass(frozen=True)
class SelectionConfig:
    alpha: float = 0.01
    nu: int = 1
    kmn: int = 0
    kmx: int | None = None
    final_subset_pass: bool = True
    final_pass_limit: int = 20
    m: int = 1
    alt_outer: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha={self.alpha} outside (0, 1)")
        if self.nu < 1:
            raise ValueError("nu must be >= 1")
        if self.kmn < 0 or self.m < 1:
            raise ValueError("kmn must be >= 0 and m >= 1")


@dataclass(frozen=True)
class Step:
    index: int
    pvalue: float
    rss: float


@dataclass
class SelectionTrace:
    steps: list[Step]
    chosen: list[int]
    final_pvalues: list[float]
    coeffs: np.ndarray
    rss: float
    status: str  # ok | empty | no-qualifying-subset | saturated | no-admissible-candidate
    asymptotic: bool = False

    @property
    def is_empty(self) -> bool:
        return not self.chosen


@dataclass(frozen=True)
class SubsetApproximation:
    indices: tuple[int, ...]
    rss: float
    pvalues: tuple[float, ...]


def _empty_trace(status: str, steps: list[Step] | None = None) -> SelectionTrace:
    return SelectionTrace(steps or [], [], [], np.empty(0), float("nan"), status)


def _effective_kmx(data: Dataset, cfg: SelectionConfig, q_eff: int) -> int:
    kmx = min(data.n - 2, q_eff)
    if cfg.kmx is not None:
        kmx = min(kmx, cfg.kmx)
    return kmx


def _forward_path(
    data: Dataset, cfg: SelectionConfig, candidates
) -> tuple[FitState, list[Step], str]:
    """Greedy stepwise path; returns the fit state, steps and a status."""
    universe = sorted(candidates)
    q_eff = len(universe)
    state = FitState(data, candidates=np.asarray(universe))
    kmx = _effective_kmx(data, cfg, q_eff)
    rss_floor = _RSS_FLOOR * float(data.y @ data.y)
    steps: list[Step] = []
    status = "ok"
    while True:
        k = state.k
        if k >= kmx or state.n_remaining == 0:
            break
        if state.rss <= rss_floor:
            status = "saturated"
            break
        nu = min(cfg.nu, q_eff - k)
        try:
            b, rss_next = state.best_candidate()
        except CollinearityError:
            if k < cfg.kmn:
                status = "no-admissible-candidate"
                warnings.warn(
                    "candidate pool exhausted by collinearity before the forced "
                    f"inclusion count kmn={cfg.kmn} was reached (k={k})",
                    stacklevel=3,
                )
            break
        p = pval_stepwise(
            rss_next, state.rss, data.n, k, q_eff, nu=nu, alt_outer=cfg.alt_outer
        )
        if k >= cfg.kmn and p > cfg.alpha:
            break
        state.advance(b)
        steps.append(Step(b, p, state.rss))
    return state, steps, status


def _drop_one_rss(data: Dataset, subset: list[int]) -> list[float]:
    """rss of subset minus each member in turn, via the Gram matrix."""
    k = len(subset)
    A = np.concatenate([data.X[:, subset], data.y[:, None]], axis=1)
    G = A.T @ A
    gyy = float(G[k, k])
    out = []
    for drop in range(k):
        pos = [p for p in range(k) if p != drop]
        if not pos:
            out.append(gyy)
            continue
        Gss = G[np.ix_(pos, pos)]
        gsy = G[pos, k]
        c = np.linalg.solve(Gss, gsy)
        out.append(float(max(gyy - gsy @ c, 0.0)))
    return out


def _final_pvalues(data: Dataset, subset: list[int], rss: float, q_eff: int) -> list[float]:
    drops = _drop_one_rss(data, subset)
    k = len(subset)
    return [
        pval_all_subset(rss, max(d, rss), data.n, k, q_eff) for d in drops
    ]


def _trace_for(data: Dataset, chosen: list[int], steps, q_eff: int, status="ok") -> SelectionTrace:
    sub = FitState(data)
    for j in chosen:
        sub.advance(j)
    pvals = _final_pvalues(data, chosen, sub.rss, q_eff)
    return SelectionTrace(steps, chosen, pvals, sub.coefficients(), sub.rss, status)


def f1st(data: Dataset, cfg: SelectionConfig = SelectionConfig(), candidates=None) -> SelectionTrace:
    """Stepwise selection.

    The first kmn steps bypass the alpha test; afterwards selection stops
    at the first candidate P-value above alpha.  If the selected set is at
    most final_pass_limit large, all of its subsets are scanned and the
    smallest-rss subset whose every member qualifies is returned; an empty
    trace (not an error) results when no subset qualifies.
    """
    if candidates is None:
        candidates = range(data.q)
    universe = sorted(candidates)
    q_eff = len(universe)
    state, steps, status = _forward_path(data, cfg, universe)
    selected = list(state.selected)
    if not selected:
        return _empty_trace("empty" if status == "ok" else status)

    if cfg.final_subset_pass and len(selected) <= cfg.final_pass_limit:
        best = _best_qualifying_subset(data, selected, q_eff, cfg.alpha)
        if best is None:
            return _empty_trace("no-qualifying-subset", steps)
        chosen, rss, pvals = best
        sub = FitState(data)
        for j in chosen:
            sub.advance(j)
        return SelectionTrace(steps, chosen, pvals, sub.coefficients(), rss, status)

    pvals = _final_pvalues(data, selected, state.rss, q_eff)
    return SelectionTrace(steps, selected, pvals, state.coefficients(), state.rss, status)


def _best_qualifying_subset(data: Dataset, selected: list[int], q_eff: int, alpha: float):
    """Smallest-rss subset of `selected` whose members all qualify, or None."""
    k = len(selected)
    lattice = subset_rss_lattice(data, selected)
    best_mask, best_rss = None, float("inf")
    for mask in range(1, 1 << k):
        size = mask.bit_count()
        rss = lattice[mask]
        if rss >= best_rss:
            continue
        ok = True
        for p in range(k):
            if not mask >> p & 1:
                continue
            rss_minus = lattice[mask & ~(1 << p)]
            pv = pval_all_subset(rss, max(rss_minus, rss), data.n, size, q_eff)
            if pv > alpha:
                ok = False
                break
        if ok:
            best_mask, best_rss = mask, rss
    if best_mask is None:
        return None
    chosen = [selected[p] for p in range(k) if best_mask >> p & 1]
    chosen.sort()
    pvals = _final_pvalues(data, chosen, best_rss, q_eff)
    return chosen, best_rss, pvals


def f2st(data: Dataset, cfg: SelectionConfig = SelectionConfig()) -> list[SelectionTrace]:
    """Repeat f1st on the shrinking pool until a round selects nothing."""
    remaining = set(range(data.q))
    traces: list[SelectionTrace] = []
    for _ in range(data.q):
        if not remaining:
            break
        trace = f1st(data, cfg, candidates=remaining)
        if trace.is_empty:
            break
        traces.append(trace)
        remaining -= set(trace.chosen)
    return traces


def f3st(data: Dataset, cfg: SelectionConfig = SelectionConfig()) -> list[SubsetApproximation]:
    """Alternative approximations by leave-one-out re-selection to depth m.

    Starting from the f1st set, each selected covariate is excluded in turn
    (retaining the rest of the pool) and f1st is rerun; branches recurse to
    depth cfg.m.  Approximations are deduplicated and ordered by rss.
    """
    universe = frozenset(range(data.q))
    found: dict[frozenset[int], SubsetApproximation] = {}
    visited: set[frozenset[int]] = set()

    def run(excluded: frozenset[int], depth: int) -> None:
        if excluded in visited:
            return
        visited.add(excluded)
        pool = universe - excluded
        if not pool:
            return
        trace = f1st(data, cfg, candidates=pool)
        if trace.is_empty:
            return
        key = frozenset(trace.chosen)
        if key not in found:
            found[key] = SubsetApproximation(
                tuple(sorted(trace.chosen)), trace.rss, tuple(trace.final_pvalues)
            )
        if depth < cfg.m:
            for i in trace.chosen:
                run(excluded | {i}, depth + 1)

    run(frozenset(), 0)
    return sorted(found.values(), key=lambda a: (a.rss, a.indices))


def fasb(
    data: Dataset, cfg: SelectionConfig = SelectionConfig(), universe=None
) -> list[SubsetApproximation]:
    """All-subsets selection: maximal subsets whose members all qualify.

    Enumerates 2^q subsets, so q is capped at 25 unless an explicit
    universe restricts the enumeration (e.g. a prior stepwise selection).
    """
    if universe is None:
        if data.q > 25:
            raise ValueError(
                f"all-subsets enumeration over q={data.q} covariates refused; "
                "pass an explicit universe (e.g. a stepwise pre-selection) "
                "or use f1st/f2st/f3st"
            )
        cols = list(range(data.q))
    else:
        cols = sorted(universe)
    qn = len(cols)
    lattice = subset_rss_lattice(data, cols)
    qualifying: list[tuple[int, float, tuple[float, ...]]] = []
    for mask in range(1, 1 << qn):
        size = mask.bit_count()
        if size >= data.n:
            continue
        rss = lattice[mask]
        pvals = []
        ok = True
        for p in range(qn):
            if not mask >> p & 1:
                continue
            rss_minus = lattice[mask & ~(1 << p)]
            pv = pval_all_subset(rss, max(rss_minus, rss), data.n, size, qn)
            if pv > cfg.alpha:
                ok = False
                break
            pvals.append(pv)
        if ok:
            qualifying.append((mask, rss, tuple(pvals)))
    # Maximality pruning: drop any subset contained in another retained one.
    masks = [m for m, _, _ in qualifying]
    maximal = []
    for m, rss, pvals in qualifying:
        if any(other != m and other & m == m for other in masks):
            continue
        idx = tuple(cols[p] for p in range(qn) if m >> p & 1)
        maximal.append(SubsetApproximation(idx, rss, pvals))
    return sorted(maximal, key=lambda a: (a.rss, a.indices))
