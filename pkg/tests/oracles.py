"""Independent reference computations for the tests.

Nothing here calls the library's integration, cut or switching-point code.
Densities are read as raw ``(breakpoints, values)`` data and integrated on a
uniform grid.  When every breakpoint lies on the grid (the random generator
uses a 1/1024 grid, and 4096 is a multiple of it) the grid sums are exact.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

GRID = 4096


def density_at(d, x: float) -> float:
    """Density value just right of ``x``, looked up by a plain linear scan."""
    bps, vals = d.breakpoints, d.values
    for k in range(len(vals)):
        if float(bps[k]) <= x < float(bps[k + 1]):
            return float(vals[k])
    return float(vals[-1])


def grid_integral(d, lo, hi, step: float = 1e-4) -> float:
    """Midpoint-rule integral of a step density over ``[lo, hi]``."""
    lo, hi = float(lo), float(hi)
    if hi <= lo:
        return 0.0
    k = max(1, int(math.ceil((hi - lo) / step)))
    h = (hi - lo) / k
    mids = lo + h * (np.arange(k) + 0.5)
    bps = np.array([float(b) for b in d.breakpoints])
    vals = np.array([float(v) for v in d.values])
    idx = np.clip(np.searchsorted(bps, mids, side="right") - 1, 0, len(vals) - 1)
    return float(vals[idx].sum() * h)


def bisect_cut(d, x, r, tol: float = 1e-9) -> float:
    """Smallest y with grid_integral(x, y) >= r, by float bisection."""
    lo, hi = float(x), 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if grid_integral(d, x, mid, 1e-5) >= float(r) - tol:
            hi = mid
        else:
            lo = mid
    return hi


def _cells(d, grid: int):
    """Per-cell density values of ``d`` on a ``grid``-cell partition of [0, 1]."""
    cells = []
    bps = [Fraction(int(b.numerator), int(b.denominator)) for b in d.breakpoints]
    for k, v in enumerate(d.values):
        a, b = bps[k] * grid, bps[k + 1] * grid
        if a.denominator != 1 or b.denominator != 1:
            raise ValueError("breakpoint off the grid")
        cells.extend([Fraction(int(v.numerator), int(v.denominator))] * int(b - a))
    return cells


class GridFunction:
    """Exact values ``num[g] / den`` at the grid points ``g / grid``."""

    def __init__(self, num, den: int, grid: int):
        self.num, self.den, self.grid = num, den, grid

    def __getitem__(self, g) -> Fraction:
        return Fraction(int(self.num[g]), self.den)

    def __len__(self):
        return len(self.num)

    def minus(self, r):
        """Integer array with the sign of ``f - r`` at every grid point."""
        r = Fraction(r)
        return self.num * r.denominator - r.numerator * self.den


def exact_grid_cumulative(d, grid: int = GRID) -> GridFunction:
    """Exact integral of ``d`` over ``[0, g / grid]`` for every ``g``.

    Requires every breakpoint of ``d`` to be a multiple of ``1 / grid``.
    """
    cells = _cells(d, grid)
    den = math.lcm(*(c.denominator for c in cells))
    ints = np.array([c.numerator * (den // c.denominator) for c in cells], dtype=object)
    return GridFunction(np.concatenate([[0], np.cumsum(ints)]), den * grid, grid)


def long_values_on_grid(valuation, grid: int = GRID) -> GridFunction:
    """V(LR(x_g)) on the grid: top half of the layers left of x, bottom half right."""
    half = len(valuation.layers) // 2
    cums = [exact_grid_cumulative(d, grid) for d in valuation.layers]
    den = math.lcm(*(c.den for c in cums))
    total = np.zeros(grid + 1, dtype=object)
    for k, c in enumerate(cums):
        part = c.num * (den // c.den)
        total = total + (part if k < half else part[-1] - part)
    return GridFunction(total, den, grid)


def first_root_cell(f: GridFunction, r):
    """Grid cell ``(lo, hi)`` holding the minimal root of ``f == r``, where ``f``
    is linear on each cell; ``None`` when there is no root."""
    d = f.minus(r)
    if d[0] == 0:
        return (Fraction(0), Fraction(0))
    hits = np.nonzero((d[:-1] * d[1:]) <= 0)[0]
    if not len(hits):
        return None
    g = int(hits[0]) + 1
    return (Fraction(g - 1, f.grid), Fraction(g, f.grid))


def majority_grid_sup(fs: list, halves: list):
    """Grid version of the sup rule: the largest grid point in the LR-majority
    set when 0 belongs to it, otherwise in the RL-majority set.

    Also returns the relaxed answer, where an agent counts as preferring a side
    when it is within one cell's worth of value of doing so.  The exact
    supremum lies between the two.
    """
    quorum = (len(fs) + 1) // 2
    grid = fs[0].grid

    def counts(slack):
        # minus() is scaled by the target's denominator, so scale the slack too
        lr = sum((f.minus(h) >= -s * Fraction(h).denominator).astype(int) for f, h, s in zip(fs, halves, slack))
        rl = sum((f.minus(h) <= s * Fraction(h).denominator).astype(int) for f, h, s in zip(fs, halves, slack))
        return lr, rl

    # |f'| <= sum of layer density maxima; one cell moves f by at most that / grid
    slack = [max(1, int(np.max(np.abs(np.diff(f.num))))) for f in fs]
    lr, rl = counts([0] * len(fs))
    side_lr = lr[0] >= quorum
    strict = lr if side_lr else rl
    lo = int(np.nonzero(strict >= quorum)[0].max())
    lr2, rl2 = counts(slack)
    loose = lr2 if side_lr else rl2
    hi = int(np.nonzero(loose >= quorum)[0].max())
    return side_lr, Fraction(lo, grid), Fraction(hi, grid)


def all_matchings(agents, edges):
    """Every matching of a bipartite graph, as dicts, by exhaustive recursion."""
    agents = list(agents)

    def rec(k, used):
        if k == len(agents):
            yield {}
            return
        a = agents[k]
        yield from rec(k + 1, used)
        for t in edges.get(a, ()):
            if t not in used:
                for rest in rec(k + 1, used | {t}):
                    yield {a: t, **rest}

    return rec(0, frozenset())


def brute_max_envy_free_size(agents, items, edges) -> int:
    best = 0
    for mt in all_matchings(agents, edges):
        taken = set(mt.values())
        if all(not (set(edges.get(a, ())) & taken) for a in agents if a not in mt):
            best = max(best, len(mt))
    return best


def brute_max_matching_size(agents, items, edges) -> int:
    return max(len(mt) for mt in all_matchings(agents, edges))


def random_graph(rng, max_agents: int = 5, max_items: int = 5, p: float | None = None):
    na, ni = rng.randint(0, max_agents), rng.randint(0, max_items)
    p = rng.random() if p is None else p
    edges = {a: [t for t in range(ni) if rng.random() < p] for a in range(na)}
    return list(range(na)), list(range(ni)), edges


def grid_point_set(pieces, grid: int = 1000):
    """Grid points (as Fractions) covered by a list of (lo, hi) closed intervals."""
    pts = set()
    for lo, hi in pieces:
        lo, hi = Fraction(lo), Fraction(hi)
        for g in itertools.count(math.ceil(lo * grid)):
            x = Fraction(g, grid)
            if x > hi:
                break
            pts.add(x)
    return pts
