"""Interpolated lookup table of mean null false-positive counts.

The shipped table is generated by scripts/gen_fp_table.py with a fixed
master seed (the reduced simulator of gcovsel.fpsim); lookups interpolate
multilinearly in (log n, log q, nu) at the two supported alpha levels.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np

from .fpsim import simulate_fp

FORMAT_TAG = "gcovsel-fnfp-table-v1"

GRID_N = (50, 100, 200, 500, 1000, 2000, 5000)
GRID_Q = (25, 100, 500, 1000, 5000, 20000, 50000)
GRID_NU = tuple(range(1, 11))
GRID_ALPHA = (0.01, 0.05)


class FpLookupError(LookupError):
    """Query outside the table; run simulate_fp for this parameter point."""


@dataclass(frozen=True)
class FpTable:
    ns: tuple[int, ...]
    qs: tuple[int, ...]
    nus: tuple[int, ...]
    alphas: tuple[float, ...]
    means: np.ndarray  # shape (len(ns), len(qs), len(nus), len(alphas))
    seed: int
    reps: tuple[int, ...]  # per q-grid entry

    def lookup(self, n: int, q: int, alpha: float, nu: int) -> float:
        if not (self.ns[0] <= n <= self.ns[-1] and self.qs[0] <= q <= self.qs[-1]):
            raise FpLookupError(
                f"(n={n}, q={q}) outside the table grid "
                f"n in [{self.ns[0]}, {self.ns[-1]}], q in [{self.qs[0]}, {self.qs[-1]}]; "
                "use simulate_fp instead"
            )
        if not self.nus[0] <= nu <= self.nus[-1]:
            raise FpLookupError(f"nu={nu} outside [{self.nus[0]}, {self.nus[-1]}]")
        try:
            ai = self.alphas.index(alpha)
        except ValueError:
            raise FpLookupError(
                f"alpha={alpha} not tabulated (available: {self.alphas}); "
                "use simulate_fp instead"
            ) from None
        plane = self.means[:, :, :, ai]
        coords = (
            np.log(np.asarray(self.ns, dtype=float)),
            np.log(np.asarray(self.qs, dtype=float)),
            np.asarray(self.nus, dtype=float),
        )
        point = (np.log(n), np.log(q), float(nu))
        return _multilinear(plane, coords, point)


def _multilinear(values: np.ndarray, coords, point) -> float:
    """Multilinear interpolation; exact at grid nodes."""
    idx = []
    frac = []
    for axis, (grid, x) in enumerate(zip(coords, point)):
        i = int(np.searchsorted(grid, x, side="right") - 1)
        i = min(max(i, 0), len(grid) - 2)
        t = (x - grid[i]) / (grid[i + 1] - grid[i])
        idx.append(i)
        frac.append(min(max(t, 0.0), 1.0))
    out = 0.0
    for corner in range(8):
        weight = 1.0
        sel = []
        for axis in range(3):
            hi = corner >> axis & 1
            weight *= frac[axis] if hi else 1.0 - frac[axis]
            sel.append(idx[axis] + hi)
        if weight:
            out += weight * float(values[tuple(sel)])
    return out


def write_table(table: FpTable, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# {FORMAT_TAG}\n")
        fh.write(f"seed={table.seed}\n")
        fh.write("n=" + ",".join(map(str, table.ns)) + "\n")
        fh.write("q=" + ",".join(map(str, table.qs)) + "\n")
        fh.write("nu=" + ",".join(map(str, table.nus)) + "\n")
        fh.write("alpha=" + ",".join(map(str, table.alphas)) + "\n")
        fh.write("reps=" + ",".join(map(str, table.reps)) + "\n")
        fh.write("# means, row-major over (n, q, nu, alpha)\n")
        for v in table.means.reshape(-1):
            fh.write(f"{float(v)!r}\n")


def read_table(path_or_file) -> FpTable:
    if hasattr(path_or_file, "read"):
        lines = path_or_file.read().splitlines()
    else:
        with open(path_or_file) as fh:
            lines = fh.read().splitlines()
    if not lines or lines[0].strip() != f"# {FORMAT_TAG}":
        raise ValueError(f"not a {FORMAT_TAG} file")
    head = {}
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        if line.startswith("#"):
            body_start = i + 1
            break
        key, _, val = line.partition("=")
        head[key] = val
    ns = tuple(int(v) for v in head["n"].split(","))
    qs = tuple(int(v) for v in head["q"].split(","))
    nus = tuple(int(v) for v in head["nu"].split(","))
    alphas = tuple(float(v) for v in head["alpha"].split(","))
    reps = tuple(int(v) for v in head["reps"].split(","))
    vals = np.array([float(v) for v in lines[body_start:] if v.strip()])
    means = vals.reshape(len(ns), len(qs), len(nus), len(alphas))
    return FpTable(ns, qs, nus, alphas, means, int(head["seed"]), reps)


def generate_table(
    ns=GRID_N,
    qs=GRID_Q,
    nus=GRID_NU,
    alphas=GRID_ALPHA,
    seed: int = 20240901,
    reps_for_q=None,
    progress=None,
) -> FpTable:
    """Simulate every grid cell with the reduced simulator.

    Replication counts shrink for the largest q so generation stays
    tractable; means are made nondecreasing in nu afterwards (isotonic
    cleanup of residual Monte-Carlo noise).
    """
    if reps_for_q is None:
        reps_for_q = lambda q: 2000 if q <= 5000 else (600 if q <= 20000 else 400)
    reps = tuple(reps_for_q(q) for q in qs)
    means = np.zeros((len(ns), len(qs), len(nus), len(alphas)))
    for qi, q in enumerate(qs):
        for ni, n in enumerate(ns):
            for ai, alpha in enumerate(alphas):
                for vi, nu in enumerate(nus):
                    cell_seed = seed + 1_000_003 * (ni + 101 * (qi + 101 * (vi + 101 * ai)))
                    h = simulate_fp(
                        n, q, alpha=alpha, nu=nu, nsim=reps[qi],
                        seed=cell_seed, method="reduced",
                    )
                    means[ni, qi, vi, ai] = h.mean
                    if progress:
                        progress(n, q, alpha, nu, h.mean)
    means = np.maximum.accumulate(means, axis=2)
    return FpTable(tuple(ns), tuple(qs), tuple(nus), tuple(alphas), means, seed, reps)


_packaged_table: FpTable | None = None


def packaged_table() -> FpTable:
    global _packaged_table
    if _packaged_table is None:
        ref = importlib.resources.files("gcovsel.data").joinpath("fp_table.txt")
        with ref.open("r") as fh:
            _packaged_table = read_table(fh)
    return _packaged_table


def lookup_fp(n: int, q: int, alpha: float = 0.01, nu: int = 1,
              table: FpTable | None = None) -> float:
    """Interpolated mean false-positive count for a stepwise null run."""
    if table is None:
        table = packaged_table()
    return table.lookup(n, q, alpha, nu)
