"""Dependency graphs by per-node covariate selection.

Each column of X is regressed on all the others with the stepwise
selector at cut-off alpha/q; a selected covariate contributes a directed
edge into the regressed node.  Symmetrizing gives the undirected graph.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .regression import CollinearityError, Dataset
from .selection import SelectionConfig, f1st, f2st, f3st

_METHODS = ("f1st", "f2st", "f3st")


@dataclass(frozen=True)
class DependencyGraph:
    n_nodes: int
    directed_edges: list[tuple[int, int]]  # (source j, target i): j selected for i
    per_edge_pvalue: dict[tuple[int, int], float]
    names: list[str]
    alpha_effective: float
    isolated_failures: list[int]  # nodes whose regression failed outright

    @property
    def undirected_edges(self) -> list[tuple[int, int]]:
        pairs = {tuple(sorted(e)) for e in self.directed_edges}
        return sorted(pairs)


def _node_selection(data: Dataset, method: str, cfg: SelectionConfig):
    """Selected indices and their final P-values for one node's regression."""
    if method == "f1st":
        trace = f1st(data, cfg)
        return list(zip(trace.chosen, trace.final_pvalues))
    if method == "f2st":
        out = []
        for trace in f2st(data, cfg):
            out.extend(zip(trace.chosen, trace.final_pvalues))
        return out
    out = {}
    for approx in f3st(data, cfg):
        for j, p in zip(approx.indices, approx.pvalues):
            if j not in out or p < out[j]:
                out[j] = p
    return sorted(out.items())


def build_graph(
    X: np.ndarray,
    alpha: float = 0.01,
    method: str = "f1st",
    cfg: SelectionConfig | None = None,
    names: list[str] | None = None,
) -> DependencyGraph:
    """Regress every column on the rest; edges at effective cut-off alpha/q.

    The Bonferroni division by q keeps the probability of any edge under
    independence at about alpha.  A node whose regression fails (for
    instance a column collinear with the rest) stays isolated with a
    warning rather than failing the whole graph.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a matrix")
    n, q = X.shape
    if q < 2 or n < 3:
        raise ValueError(f"need q >= 2 and n >= 3, got n={n}, q={q}")
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}, got {method!r}")
    alpha_eff = alpha / q
    if cfg is None:
        cfg = SelectionConfig(alpha=alpha_eff)
    else:
        cfg = replace(cfg, alpha=alpha_eff)
    if names is None:
        names = [f"x{i + 1}" for i in range(q)]

    directed: list[tuple[int, int]] = []
    pvals: dict[tuple[int, int], float] = {}
    failures: list[int] = []
    other = np.arange(q)
    for i in range(q):
        cols = np.delete(other, i)
        try:
            node_data = Dataset(X[:, i], X[:, cols], names=[names[j] for j in cols])
            picked = _node_selection(node_data, method, cfg)
        except (CollinearityError, ValueError) as exc:
            failures.append(i)
            warnings.warn(
                f"regression of node {i} ({names[i]}) failed ({exc}); "
                "leaving it isolated",
                stacklevel=2,
            )
            continue
        for local_j, p in picked:
            j = int(cols[local_j])
            directed.append((j, i))
            pvals[(j, i)] = p
    return DependencyGraph(q, sorted(directed, key=lambda e: (e[1], e[0])),
                           pvals, list(names), alpha_eff, failures)


def export_graph(g: DependencyGraph, fmt: str = "edge-list", directed: bool = True) -> str:
    """Serialize a graph as a TSV edge list or DOT, stable ordering.

    Edge lists are sorted by target then source.  DOT uses `digraph` with
    `->` for the directed form and `graph` with `--` after symmetrization.
    """
    if fmt == "edge-list":
        lines = ["source\ttarget\tpvalue" if directed else "node_a\tnode_b"]
        if directed:
            for j, i in sorted(g.directed_edges, key=lambda e: (e[1], e[0])):
                lines.append(f"{j}\t{i}\t{g.per_edge_pvalue[(j, i)]:.6g}")
        else:
            for a, b in sorted(g.undirected_edges, key=lambda e: (e[1], e[0])):
                lines.append(f"{a}\t{b}")
        return "\n".join(lines) + "\n"
    if fmt == "dot":
        if directed:
            lines = ["digraph dependencies {"]
            for j, i in sorted(g.directed_edges, key=lambda e: (e[1], e[0])):
                lines.append(f'    "{g.names[j]}" -> "{g.names[i]}";')
        else:
            lines = ["graph dependencies {"]
            for a, b in sorted(g.undirected_edges, key=lambda e: (e[1], e[0])):
                lines.append(f'    "{g.names[a]}" -- "{g.names[b]}";')
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown graph format {fmt!r}")


def parse_edge_list(text: str) -> list[tuple[int, int]]:
    """Inverse of the TSV emitter, for round-trip checks."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    out = []
    for ln in lines[1:]:
        parts = ln.split("\t")
        out.append((int(parts[0]), int(parts[1])))
    return out
