"""Command-line interface.

Subcommands: select, subsets, region, fnfp, graph, simulate.  Every
report is available as JSON (schema-versioned) or a human table; all
randomized commands echo their seed so reruns reproduce the report.

Exit codes: 0 success (an empty selection is a success), 2 input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .extensions import HuberLoss, SeparableFitError, logistic_stepwise, m_stepwise
from .fpsim import simulate_fp
from .fptable import FpLookupError, lookup_fp
from .graphs import build_graph, export_graph
from .pipeline import SimDesign, gen_design, load_csv
from .regions import interval, region
from .regression import CollinearityError, Dataset
from .selection import SelectionConfig, f1st, f2st, f3st, fasb
from .special import NumericalError

SCHEMA = "gcovsel-report-1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class InputError(Exception):
    pass


def _threads_default() -> int:
    try:
        return max(1, int(os.environ.get("GCOVSEL_THREADS", "1")))
    except ValueError:
        return 1


def _report(args, results: dict, t0: float) -> dict:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": " ".join(args._argv),
        "config": {
            k: v for k, v in sorted(vars(args).items())
            if not k.startswith("_") and k != "func" and v is not None
        },
        "seed": getattr(args, "seed", None),
        "results": results,
        "timing_s": round(time.time() - t0, 3),
    }


def _emit(report: dict, args, table_lines) -> None:
    if args.format == "json":
        json.dump(report, sys.stdout, indent=2, default=_jsonable)
        sys.stdout.write("\n")
    else:
        for line in table_lines:
            print(line)
        print(f"# seed={report['seed']} time={report['timing_s']}s")


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, frozenset):
        return sorted(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def _load(args) -> Dataset:
    y = int(args.y) if str(args.y).lstrip("-").isdigit() else args.y
    try:
        return load_csv(args.data, y, strict=args.strict)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def _cfg(args) -> SelectionConfig:
    return SelectionConfig(
        alpha=args.alpha,
        nu=args.nu,
        kmn=args.kmn,
        kmx=args.kmx,
        m=getattr(args, "m", 1),
    )


def _trace_rows(trace, names):
    rows = []
    for j, p, c in zip(trace.chosen, trace.final_pvalues, np.atleast_1d(trace.coeffs)):
        rows.append({"index": j, "name": names[j], "pvalue": float(p),
                     "coefficient": float(c)})
    return rows


def _fmt_table(header, rows, keys):
    widths = [max(len(h), *(len(str(r[k])) for r in rows)) if rows else len(h)
              for h, k in zip(header, keys)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for r in rows:
        lines.append("  ".join(str(r[k]).ljust(w) for k, w in zip(keys, widths)))
    return lines


def _sig6(x: float) -> str:
    return f"{x:.6g}"


# --------------------------------------------------------------------------
# select

def cmd_select(args) -> int:
    t0 = time.time()
    data = _load(args)
    cfg = _cfg(args)
    if args.loss == "huber":
        traces = [m_stepwise(data, cfg, HuberLoss(args.huber_c))]
    elif args.loss == "logistic":
        traces = [logistic_stepwise(data, cfg)]
    elif args.method == "f1st":
        traces = [f1st(data, cfg)]
    elif args.method == "f2st":
        traces = f2st(data, cfg)
    else:
        approx = f3st(data, cfg)
        rows = [
            {"indices": list(a.indices),
             "names": [data.names[j] for j in a.indices],
             "rss": a.rss,
             "pvalues": [float(p) for p in a.pvalues]}
            for a in approx
        ]
        report = _report(args, {"approximations": rows}, t0)
        lines = [f"{len(rows)} approximation(s), ordered by rss"]
        for r in rows:
            lines.append(
                f"  rss={_sig6(r['rss'])}  " + " ".join(
                    f"{nm}(p={_sig6(p)})" for nm, p in zip(r["names"], r["pvalues"])
                )
            )
        _emit(report, args, lines)
        return EXIT_OK

    out = []
    lines = []
    for i, tr in enumerate(traces):
        rows = _trace_rows(tr, data.names)
        out.append({
            "chosen": tr.chosen,
            "status": tr.status,
            "asymptotic": tr.asymptotic,
            "rss": None if tr.is_empty else float(tr.rss),
            "covariates": rows,
        })
        if len(traces) > 1:
            lines.append(f"round {i + 1}:")
        if tr.is_empty:
            lines.append(f"empty selection (status: {tr.status})")
            continue
        disp = [dict(r, pvalue=_sig6(r["pvalue"]),
                     coefficient=_sig6(r["coefficient"])) for r in rows]
        lines += _fmt_table(
            ["index", "name", "pvalue", "coefficient"], disp,
            ["index", "name", "pvalue", "coefficient"],
        )
        lines.append(f"rss = {_sig6(tr.rss)}")
    report = _report(args, {"traces": out}, t0)
    _emit(report, args, lines)
    return EXIT_OK


# --------------------------------------------------------------------------
# subsets (all-subsets enumeration)

def cmd_subsets(args) -> int:
    t0 = time.time()
    data = _load(args)
    cfg = _cfg(args)
    approx = fasb(data, cfg)
    rows = [
        {"indices": list(a.indices),
         "names": [data.names[j] for j in a.indices],
         "rss": a.rss,
         "pvalues": [float(p) for p in a.pvalues]}
        for a in approx
    ]
    report = _report(args, {"subsets": rows}, t0)
    lines = [f"{len(rows)} maximal qualifying subset(s), ordered by rss"]
    for r in rows:
        lines.append(f"  rss={_sig6(r['rss'])}  " + ",".join(r["names"]))
    _emit(report, args, lines)
    return EXIT_OK


# --------------------------------------------------------------------------
# region

def _parse_subset(text: str, q: int) -> list[int]:
    try:
        cols = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad subset spec {text!r}; want comma-separated integers")
    if not cols:
        raise InputError("empty subset")
    zero = [c - 1 for c in cols]  # 1-based on the command line, like x1, x2, ...
    bad = [c for c in cols if not 1 <= c <= q]
    if bad:
        raise InputError(f"subset columns {bad} outside 1..{q}")
    return zero


def cmd_region(args) -> int:
    t0 = time.time()
    data = _load(args)
    subset = _parse_subset(args.subset, data.q)
    reg = region(data, subset, args.alpha)
    intervals = [interval(data, subset, j, args.alpha) for j in subset]
    results = {
        "subset": [j + 1 for j in subset],
        "rss_ls": reg.rss_ls,
        "radius_rss": reg.radius_rss,
        "center": reg.center.tolist(),
        "intervals": [
            {"name": data.names[j], "center": iv.center,
             "half_width": iv.half_width, "lo": iv.lo, "hi": iv.hi}
            for j, iv in zip(subset, intervals)
        ],
    }
    report = _report(args, results, t0)
    lines = [
        f"rss_ls = {_sig6(reg.rss_ls)}  radius_rss = {_sig6(reg.radius_rss)}",
    ]
    rows = [dict(name=r["name"], center=_sig6(r["center"]),
                 lo=_sig6(r["lo"]), hi=_sig6(r["hi"]))
            for r in results["intervals"]]
    lines += _fmt_table(["name", "center", "lo", "hi"], rows,
                        ["name", "center", "lo", "hi"])
    _emit(report, args, lines)
    return EXIT_OK


# --------------------------------------------------------------------------
# fnfp

def cmd_fnfp(args) -> int:
    t0 = time.time()
    if args.lookup:
        try:
            value = lookup_fp(args.n, args.q, args.alpha, args.nu)
        except FpLookupError as exc:
            raise InputError(str(exc)) from exc
        report = _report(args, {"mean_false_positives": value, "source": "table"}, t0)
        _emit(report, args, [f"mean false positives = {_sig6(value)} (interpolated)"])
        return EXIT_OK
    hist = simulate_fp(args.n, args.q, alpha=args.alpha, nu=args.nu,
                       nsim=args.nsim, seed=args.seed)
    report = _report(args, {
        "mean_false_positives": hist.mean,
        "sd": hist.sd,
        "histogram": {str(k): v for k, v in sorted(hist.counts.items())},
        "method": hist.method,
        "source": "simulation",
    }, t0)
    lines = [f"mean false positives = {_sig6(hist.mean)}  sd = {_sig6(hist.sd)} "
             f"({hist.nsim} replications, {hist.method})"]
    for k, v in sorted(hist.counts.items()):
        lines.append(f"  {k}: {v:.4f}")
    _emit(report, args, lines)
    return EXIT_OK


# --------------------------------------------------------------------------
# graph

def cmd_graph(args) -> int:
    t0 = time.time()
    try:
        data = load_csv(args.data, 0, strict=args.strict)
        with open(args.data, newline="") as fh:
            names = [h.strip() for h in next(csv.reader(fh))]
    except (OSError, ValueError, StopIteration) as exc:
        raise InputError(str(exc)) from exc
    # The graph treats every column symmetrically; re-attach the column that
    # load_csv split off as y.
    X = np.concatenate([data.y[:, None], data.X], axis=1)
    g = build_graph(X, alpha=args.alpha, method=args.method, names=names)
    if args.format == "dot":
        sys.stdout.write(export_graph(g, "dot", directed=not args.undirected))
        return EXIT_OK
    if args.format == "table":
        sys.stdout.write(export_graph(g, "edge-list", directed=not args.undirected))
        print(f"# {len(g.directed_edges)} directed edge(s), alpha/q = {g.alpha_effective:.3g}")
        return EXIT_OK
    report = _report(args, {
        "n_nodes": g.n_nodes,
        "alpha_effective": g.alpha_effective,
        "directed_edges": [list(e) for e in g.directed_edges],
        "undirected_edges": [list(e) for e in g.undirected_edges],
        "pvalues": {f"{j}->{i}": p for (j, i), p in sorted(g.per_edge_pvalue.items())},
        "isolated_failures": g.isolated_failures,
    }, t0)
    json.dump(report, sys.stdout, indent=2, default=_jsonable)
    sys.stdout.write("\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate

def _score(chosen, truth) -> tuple[int, int]:
    s = set(chosen)
    return len(s - truth), len(truth - s)


def _sim_tutorial1(args):
    cfg = SelectionConfig(alpha=args.alpha, nu=args.nu, kmn=0)
    rows = []
    for rep in range(args.reps):
        t1 = time.time()
        res = gen_design(SimDesign("toeplitz", args.n, args.q, rho=0.25,
                                   p_active=60, amplitude=4.5,
                                   seed=args.seed + rep))
        tr = f1st(res.data, cfg)
        fp, fn = _score(tr.chosen, res.truth)
        rows.append({"rep": rep, "fp": fp, "fn": fn,
                     "time_s": round(time.time() - t1, 4)})
    return rows, ["fp", "fn", "time_s"]


def _sim_null(args):
    if args.orthonormal:
        cfg = SelectionConfig(alpha=args.alpha, nu=args.nu, kmn=0,
                              final_subset_pass=False)
        nonempty = 0
        for rep in range(args.reps):
            res = gen_design(SimDesign("orthonormal", args.n, args.q,
                                       seed=args.seed + rep))
            tr = f1st(res.data, cfg)
            nonempty += 0 if tr.is_empty else 1
        rate = nonempty / args.reps
        return [{"nonempty_rate": rate, "reps": args.reps,
                 "design": "orthonormal"}], ["nonempty_rate", "reps", "design"]
    hist = simulate_fp(args.n, args.q, alpha=args.alpha, nu=args.nu,
                       nsim=args.reps, seed=args.seed)
    rate = 1.0 - hist.counts.get(0, 0.0)
    return [{"nonempty_rate": rate, "mean_fp": hist.mean, "reps": args.reps,
             "design": "gaussian-null"}], ["nonempty_rate", "mean_fp", "reps", "design"]


def _sim_consistency(args):
    q, kstar, tau, n = args.q, args.kstar, args.tau, args.n
    # Equal coefficients on the unit-norm column scale.  The recovery
    # condition is an inequality, so the coefficient is set to the actual
    # finite-sample stepwise threshold plus a 3-sigma margin (the
    # asymptotic form absorbs both into lower-order terms); the resulting
    # value is checked against the stated tau bound and the larger wins.
    from .pvalues import kappa

    kap = kappa(n, q, args.alpha)
    beta = kap * math.sqrt(n)
    for _ in range(50):
        beta = kap * math.sqrt(n + kstar * beta * beta) + 3.0
    R = (math.sqrt(tau * math.log(q)) + math.sqrt(2.0 * math.log(kstar))) / math.sqrt(n)
    beta_tau = R * math.sqrt(n) / math.sqrt(1.0 - kstar * R * R) if kstar * R * R < 1 else R * math.sqrt(n)
    beta = max(beta, beta_tau) / math.sqrt(n)
    cfg = SelectionConfig(alpha=args.alpha, nu=args.nu, kmn=0,
                          final_subset_pass=False)
    exact = superset = subset_strict = 0
    for rep in range(args.reps):
        res = gen_design(SimDesign("orthonormal", n, q, p_active=kstar,
                                   amplitude=beta, seed=args.seed + rep))
        tr = f1st(res.data, cfg)
        s = set(tr.chosen)
        if res.truth <= s:
            superset += 1
            if s == res.truth:
                exact += 1
            else:
                subset_strict += 1
    return [{
        "beta": round(beta * math.sqrt(n), 4),
        "recovery_rate": superset / args.reps,
        "exact_rate": exact / args.reps,
        "overselection_rate": subset_strict / args.reps,
        "reps": args.reps,
    }], ["beta", "recovery_rate", "exact_rate", "overselection_rate", "reps"]


def _sim_randomgraph(args):
    rows = []
    for rep in range(args.reps):
        t1 = time.time()
        res = gen_design(SimDesign("random_graph", args.n, args.q,
                                   seed=args.seed + rep))
        g = build_graph(res.data.X, alpha=args.alpha, method="f1st")
        # Column i of the graph input is node i of the generated graph; the
        # decoy y never enters.
        est = set(g.undirected_edges)
        truth = {tuple(sorted(e)) for e in res.truth_edges}
        rows.append({
            "rep": rep,
            "true_edges": len(truth),
            "found": len(est & truth),
            "fp_edges": len(est - truth),
            "fn_edges": len(truth - est),
            "time_s": round(time.time() - t1, 3),
        })
    return rows, ["true_edges", "found", "fp_edges", "fn_edges", "time_s"]


_SCENARIOS = {
    "tutorial1": _sim_tutorial1,
    "null": _sim_null,
    "consistency": _sim_consistency,
    "randomgraph": _sim_randomgraph,
}

_SCENARIO_DEFAULTS = {
    "tutorial1": dict(n=1000, q=1000),
    "null": dict(n=500, q=500),
    "consistency": dict(n=2000, q=200),
    "randomgraph": dict(n=400, q=100),
}


def cmd_simulate(args) -> int:
    t0 = time.time()
    defaults = _SCENARIO_DEFAULTS[args.scenario]
    if args.n is None:
        args.n = defaults["n"]
    if args.q is None:
        args.q = defaults["q"]
    rows, keys = _SCENARIOS[args.scenario](args)
    summary = {}
    for k in keys:
        vals = [r[k] for r in rows if isinstance(r.get(k), (int, float))]
        if vals and len(rows) > 1:
            summary[k + "_mean"] = float(np.mean(vals))
    report = _report(args, {"rows": rows, "summary": summary}, t0)
    disp = [{k: (r.get(k, "") if not isinstance(r.get(k), float)
                 else _sig6(r[k])) for k in keys} for r in rows]
    lines = _fmt_table(keys, disp, keys)
    for k, v in summary.items():
        lines.append(f"{k} = {_sig6(v)}")
    _emit(report, args, lines)
    return EXIT_OK


# --------------------------------------------------------------------------

def _add_common(p, with_data=True, with_seed=False):
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--format", choices=["json", "table", "dot"], default="table")
    p.add_argument("--threads", type=int, default=_threads_default(),
                   help="worker count (results independent of it)")
    if with_data:
        p.add_argument("data", help="CSV file with a header row")
        p.add_argument("--y", default="0", help="dependent column name or 0-based index")
        p.add_argument("--strict", action="store_true",
                       help="error on missing values instead of dropping rows")
    if with_seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gcovsel",
        description="Model-free covariate selection with exact Gaussian P-values",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("select", help="stepwise covariate selection")
    _add_common(p)
    p.add_argument("--method", choices=["f1st", "f2st", "f3st"], default="f1st")
    p.add_argument("--kmn", type=int, default=10,
                   help="covariates included regardless of P-value")
    p.add_argument("--kmx", type=int, default=None)
    p.add_argument("--m", type=int, default=1, help="f3st exclusion depth")
    p.add_argument("--loss", choices=["ls", "huber", "logistic"], default="ls")
    p.add_argument("--huber-c", type=float, default=1.0)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("subsets", help="all-subsets selection (small q)")
    _add_common(p)
    p.add_argument("--kmn", type=int, default=0)
    p.add_argument("--kmx", type=int, default=None)
    p.set_defaults(func=cmd_subsets)

    p = sub.add_parser("region", help="approximation region and intervals")
    _add_common(p)
    p.add_argument("--subset", required=True,
                   help="comma-separated 1-based column indices, e.g. 1,4,7")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("fnfp", help="null false-positive calibration")
    _add_common(p, with_data=False, with_seed=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--lookup", action="store_true",
                   help="interpolate the packaged table instead of simulating")
    p.add_argument("--nsim", type=int, default=1000)
    p.set_defaults(func=cmd_fnfp)

    p = sub.add_parser("graph", help="dependency graph over all columns")
    _add_common(p)
    p.add_argument("--method", choices=["f1st", "f2st", "f3st"], default="f1st")
    p.add_argument("--undirected", action="store_true")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("simulate", help="simulation scenarios with truth scoring")
    p.add_argument("scenario", choices=sorted(_SCENARIOS))
    _add_common(p, with_data=False, with_seed=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--kstar", type=int, default=5)
    p.add_argument("--tau", type=float, default=3.0)
    p.add_argument("--orthonormal", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    args = ap.parse_args(argv)
    args._argv = ["gcovsel"] + argv
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, CollinearityError, SeparableFitError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
