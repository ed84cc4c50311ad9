"""Robertson-Webb style queries on a layered cake.

A :class:`QuerySession` is the only door protocols have to the agents'
valuations; every call bumps a counter.  ``short_*`` queries act on a single
layer, ``long_*`` queries on the diagonal pieces LR(x) / RL(x) of a cake with
an even number of layers.

Counter kinds: ``short_eval``, ``short_cut``, ``long_eval``, ``long_cut`` and
``reveal``.  The last one is charged once per (agent, layer) whenever a
protocol needs an agent's full density profile (breakpoint structure) rather
than a single number, e.g. the continuous moving-knife or the exact
majority switching point.
"""
from __future__ import annotations

import math
from collections import Counter
from enum import Enum
from typing import Sequence

from .core import (
    ZERO, LayeredCake, LayeredPiece, NoSuchPoint, Piece, Rational, StepDensity, Valuation, as_rational,
)

QUERY_KINDS = ("short_eval", "short_cut", "long_eval", "long_cut", "reveal")


class Side(Enum):
    LR = "LR"
    RL = "RL"

    def other(self) -> "Side":
        return Side.RL if self is Side.LR else Side.LR


DiagonalSide = Side


class OddLayerCount(ValueError):
    """Long-knife queries need an even number of layers."""


def diagonal_piece(cake: LayeredCake, x, side: Side = Side.LR) -> LayeredPiece:
    """LR(x) or RL(x) of ``cake`` as a layered piece in the cake's own layers.

    LR(x) is the top half of the layers left of ``x`` together with the bottom
    half right of ``x``; RL(x) is the complement.
    """
    if cake.m % 2:
        raise OddLayerCount(f"diagonal pieces need an even number of layers, got {cake.m}")
    x = as_rational(x)
    half = cake.m // 2
    left, right = Piece.span(0, x), Piece.span(x, 1)
    top, bottom = (left, right) if side is Side.LR else (right, left)
    return tuple(cake.piece(k) & (top if k < half else bottom) for k in range(cake.m))


class QuerySession:
    """Query access to ``valuations`` over ``cake`` with per-kind counters.

    ``on(other_cake)`` opens a view on a derived cake (after a merge or a
    removal) that shares the valuations and the counters.
    """

    def __init__(self, cake: LayeredCake, valuations: Sequence[Valuation], counters: Counter | None = None):
        valuations = tuple(valuations)
        for v in valuations:
            if v.m != cake.n_original:
                raise ValueError(f"valuation has {v.m} layers, cake has {cake.n_original} original layers")
        self.cake = cake
        self.valuations = valuations
        self.counters = Counter({k: 0 for k in QUERY_KINDS}) if counters is None else counters
        self._densities: dict[tuple[int, int], StepDensity] = {}

    def __repr__(self) -> str:
        return f"QuerySession(n={self.n}, m={self.m}, counters={dict(self.counters)})"

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def m(self) -> int:
        return self.cake.m

    def on(self, cake: LayeredCake) -> "QuerySession":
        return QuerySession(cake, self.valuations, self.counters)

    def _density(self, i: int, k: int) -> StepDensity:
        key = (i, k)
        d = self._densities.get(key)
        if d is None:
            d = self._densities[key] = self.valuations[i].layer_density(self.cake.layers[k])
        return d

    def _cake_total(self, i: int) -> Rational:
        return sum((self._density(i, k).total for k in range(self.m)), ZERO)

    def _long_value(self, i: int, x: Rational) -> Rational:
        half = self.m // 2
        total = ZERO
        for k in range(self.m):
            d = self._density(i, k)
            c = d.cumulative(x)
            total += c if k < half else d.total - c
        return total

    def _require_even(self):
        if self.m % 2:
            raise OddLayerCount(f"long-knife queries need an even number of layers, got {self.m}")

    # short knife

    def short_eval(self, i: int, j: int, x, y) -> Rational:
        x, y = as_rational(x), as_rational(y)
        if x > y:
            raise ValueError(f"short eval needs x <= y, got [{x}, {y}]")
        self.counters["short_eval"] += 1
        return self._density(i, j).integral(x, y)

    def short_cut(self, i: int, j: int, x, r) -> Rational:
        """Smallest ``y`` with ``V_ij([x, y] & C_j) == r``; raises :class:`NoSuchPoint`."""
        self.counters["short_cut"] += 1
        return self._density(i, j).inverse(as_rational(x), as_rational(r))

    def piece_value(self, i: int, j: int, piece: Piece) -> Rational:
        """Value of a piece lying inside layer ``j``: one short eval per interval."""
        return sum((self.short_eval(i, j, iv.lo, iv.hi) for iv in piece), ZERO)

    def layered_value(self, i: int, lp: Sequence[Piece]) -> Rational:
        return sum((self.piece_value(i, j, p) for j, p in enumerate(lp)), ZERO)

    def layer_values(self, i: int) -> list[Rational]:
        return [self.piece_value(i, j, self.cake.piece(j)) for j in range(self.m)]

    def cake_value(self, i: int) -> Rational:
        return sum(self.layer_values(i), ZERO)

    # long knife

    def long_eval(self, i: int, x, side: Side = Side.LR) -> Rational:
        self._require_even()
        x = as_rational(x)
        if not 0 <= x <= 1:
            raise ValueError(f"long eval point {x} outside [0, 1]")
        self.counters["long_eval"] += 1
        lr = self._long_value(i, x)
        return lr if side is Side.LR else self._cake_total(i) - lr

    def _long_breakpoints(self, agents: Sequence[int]) -> list[Rational]:
        pts = set()
        for i in agents:
            for k in range(self.m):
                pts.update(self._density(i, k).breakpoints)
        return sorted(pts)

    def long_cut(self, i: int, r) -> Rational:
        """Smallest ``x`` with ``V_i(LR(x)) == r``; raises :class:`NoSuchPoint`.

        ``V_i(LR(x))`` is continuous and linear between the breakpoints of the
        agent's layer densities, so scanning those segments left to right finds
        the minimal root exactly.
        """
        self._require_even()
        r = as_rational(r)
        self.counters["long_cut"] += 1
        root = _first_root(lambda x: self._long_value(i, x), self._long_breakpoints([i]), r)
        if root is None:
            raise NoSuchPoint(f"agent {i} has no diagonal piece worth {r}")
        return root

    def reveal(self, i: int, k: int) -> StepDensity:
        """Agent ``i``'s whole density profile on layer ``k``."""
        self.counters["reveal"] += 1
        return self._density(i, k)


def _first_root(f, points: Sequence[Rational], r: Rational) -> Rational | None:
    """Minimal root of ``f == r`` for ``f`` linear between consecutive ``points``."""
    prev_x = points[0]
    prev_f = f(prev_x)
    if prev_f == r:
        return prev_x
    for x in points[1:]:
        fx = f(x)
        if fx == r:
            return x
        if (prev_f < r) != (fx < r):
            return prev_x + (r - prev_f) * (x - prev_x) / (fx - prev_f)
        prev_x, prev_f = x, fx
    return None


def short_eval(s: QuerySession, i: int, j: int, x, y) -> Rational:
    return s.short_eval(i, j, x, y)


def short_cut(s: QuerySession, i: int, j: int, x, r) -> Rational:
    return s.short_cut(i, j, x, r)


def long_eval(s: QuerySession, i: int, x, side: Side = Side.LR) -> Rational:
    return s.long_eval(i, x, side)


def long_cut(s: QuerySession, i: int, r) -> Rational:
    return s.long_cut(i, r)


def switching_point(s: QuerySession, i: int) -> Rational:
    """Smallest x where agent ``i`` values LR(x) and RL(x) equally.

    Charged as one long cut at half the agent's value for the session cake.
    Since LR(0) and RL(0) = LR(1) split the cake, that half-value is always
    between the endpoint values and a root exists.
    """
    s._require_even()
    return s.long_cut(i, s._cake_total(i) / 2)


def majority_switching_point(s: QuerySession, agents: Sequence[int] | None = None) -> Rational:
    """A point where at least ceil(n/2) agents weakly prefer LR and as many weakly prefer RL.

    Every ``f_i(x) = V_i(LR(x))`` is piecewise linear, so the sets
    ``{x : f_i(x) >= V_i/2}`` are finite unions of closed intervals whose
    endpoints are density breakpoints or half-value crossings.  Majority
    membership is constant between consecutive candidate points, so the
    supremum of the LR-majority set (or, when 0 is not in it, of the
    RL-majority set) is the largest candidate in that set.

    Costs one ``reveal`` per agent and layer plus one ``long_eval`` per agent
    and candidate point.
    """
    s._require_even()
    agents = list(range(s.n)) if agents is None else list(agents)
    if not agents:
        raise ValueError("need at least one agent")
    for i in agents:
        for k in range(s.m):
            s.reveal(i, k)
    pts = s._long_breakpoints(agents)
    halves = {i: s._cake_total(i) / 2 for i in agents}
    cands = set(pts)
    for i in agents:
        prev_x, prev_f = pts[0], s._long_value(i, pts[0])
        for x in pts[1:]:
            fx = s._long_value(i, x)
            h = halves[i]
            if (prev_f < h) != (fx < h) and fx != prev_f:
                cands.add(prev_x + (h - prev_f) * (x - prev_x) / (fx - prev_f))
            prev_x, prev_f = x, fx
    cands = sorted(cands)
    quorum = math.ceil(len(agents) / 2)
    lr_count, rl_count = {}, {}
    for x in cands:
        lr = rl = 0
        for i in agents:
            f = s.long_eval(i, x)
            lr += f >= halves[i]
            rl += f <= halves[i]
        lr_count[x], rl_count[x] = lr, rl
    if lr_count[cands[0]] >= quorum:
        t = max(x for x in cands if lr_count[x] >= quorum)
    else:
        t = max(x for x in cands if rl_count[x] >= quorum)
    if lr_count[t] >= quorum and rl_count[t] >= quorum:
        return t
    good = [x for x in cands if lr_count[x] >= quorum and rl_count[x] >= quorum]
    if not good:
        raise RuntimeError("no majority switching point among the candidates")
    return good[-1]
