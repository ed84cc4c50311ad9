"""Proportional protocols.

* :func:`prop_power_two` -- contiguous and feasible, for ``m = 2**a`` layers
  and ``n >= m`` agents.  Surplus agents are peeled off with a single-layer
  shout; then majority switching points split agents and cake in halves
  (the two halves of the cake are merged diagonals) down to cut-and-choose.
* :func:`prop_matching` -- feasible, for any ``n >= m``.  A cutter splits the
  cake into equally valued pieces, a maximum envy-free matching hands some
  of them out, and the unmatched pieces become the layers of the next round.

Every recursion level works on a :class:`LayeredCake` whose layers remember
which original layers they came from, so results come back in original
coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import (
    Layer, LayeredCake, MultiAllocation, Piece, PreconditionError, VerificationFailed,
)
from .ef_protocols import _cut_and_choose
from .matching import BipartiteGraph, max_envy_free_matching
from .rw_queries import OddLayerCount, QuerySession, Side, diagonal_piece, majority_switching_point
from .verify import check_proportional, check_structure


@dataclass(frozen=True)
class MergeMap:
    """Maps pieces of a merged cake back to the cake it was merged from."""

    parent: LayeredCake
    child: LayeredCake

    def forward(self, lp: Sequence[Piece]) -> tuple:
        return self.parent.from_original(self.child.to_original(lp))

    def sources(self) -> list[list[tuple[int, Piece]]]:
        """For each child layer, the ``(parent layer, piece)`` pairs it is made of."""
        out = []
        for layer in self.child.layers:
            orig = LayeredCake([layer], self.child.n_original).to_original((layer.piece,))
            back = self.parent.from_original(orig)
            out.append([(k, p) for k, p in enumerate(back) if p])
        return out

    def compose(self, inner: "MergeMap") -> "MergeMap":
        """``inner`` maps a further merge of ``self.child``; return the direct map."""
        if inner.parent != self.child:
            raise ValueError("merge maps do not chain")
        return MergeMap(self.parent, inner.child)


@dataclass(frozen=True)
class EquitablePartition:
    pieces: tuple
    cutter: int


def merge_layers(cake: LayeredCake, j: int, j2: int) -> tuple[LayeredCake, MergeMap]:
    """Replace layer ``j`` by its union with the disjoint layer ``j2``; drop ``j2``."""
    if j == j2:
        raise ValueError("cannot merge a layer with itself")
    if (cake.piece(j) & cake.piece(j2)):
        raise ValueError(f"layers {j} and {j2} overlap")
    merged = Layer(cake.layers[j].parts + cake.layers[j2].parts)
    layers = [merged if k == j else layer for k, layer in enumerate(cake.layers) if k != j2]
    child = cake.with_layers(layers)
    return child, MergeMap(cake, child)


def merge_diagonal(cake: LayeredCake, x, side: Side = Side.LR) -> tuple[LayeredCake, MergeMap]:
    """Merge the diagonal piece LR(x) (or RL(x)) of a ``2m``-layer cake into ``m`` layers,
    pairing layer ``k`` with layer ``k + m``."""
    if cake.m % 2:
        raise OddLayerCount(f"diagonal merge needs an even number of layers, got {cake.m}")
    half = cake.m // 2
    dp = diagonal_piece(cake, x, side)
    kept = [layer.restrict(p) for layer, p in zip(cake.layers, dp)]
    child = cake.with_layers([Layer(kept[k].parts + kept[k + half].parts) for k in range(half)])
    return child, MergeMap(cake, child)


def _whole(cake: LayeredCake) -> tuple:
    return cake.to_original(cake.pieces())


def _peel(session: QuerySession, agents: list, awards: dict) -> tuple[QuerySession, list]:
    """While agents outnumber layers, hand a left piece of one layer to a shouter.

    The layer is the lowest-indexed one some agent values at least its
    proportional share of the current cake; every such agent marks where its
    share ends and the leftmost mark wins (lowest index on ties).
    """
    agents = list(agents)
    if len(agents) <= session.m:
        return session, agents
    vals = {i: session.layer_values(i) for i in agents}
    while len(agents) > session.m:
        n = len(agents)
        targets = {i: sum(vals[i]) / n for i in agents}
        j = next(k for k in range(session.m) if any(vals[i][k] >= targets[i] for i in agents))
        marks = [(session.short_cut(i, j, 0, targets[i]), i) for i in agents if vals[i][j] >= targets[i]]
        y, shouter = min(marks)
        cake = session.cake
        taken = cake.piece(j) & Piece.span(0, y)
        awards[shouter] = cake.to_original(tuple(taken if k == j else Piece.empty() for k in range(cake.m)))
        agents.remove(shouter)
        for i in agents:
            vals[i][j] -= session.short_eval(i, j, 0, y)
        session = session.on(cake.remove_from_layer(j, Piece.span(0, y)))
    return session, agents


def _check(session: QuerySession, awards: dict, contiguous: bool) -> MultiAllocation:
    alloc = MultiAllocation.from_mapping(awards, session.n, session.cake.n_original)
    report = check_structure(session.cake, alloc)
    if not (report.feasible and report.complete and (report.contiguous or not contiguous)):
        raise VerificationFailed(f"structure check failed: {report}")
    if not check_proportional(session.valuations, alloc):
        raise VerificationFailed("allocation is not proportional")
    return alloc


def _power_two(session: QuerySession, agents: list, awards: dict):
    session, agents = _peel(session, agents, awards)
    n = len(agents)
    if n == 1:
        awards[agents[0]] = _whole(session.cake)
        return
    if n == 2:
        awards.update(_cut_and_choose(session, agents[0], agents[1]))
        return
    x = majority_switching_point(session, agents)
    lr_side, rl_side, indifferent = [], [], []
    for i in agents:
        lr = session.long_eval(i, x, Side.LR)
        rl = session.long_eval(i, x, Side.RL)
        (lr_side if lr > rl else rl_side if rl > lr else indifferent).append(i)
    for i in indifferent:
        (lr_side if len(lr_side) < n // 2 else rl_side).append(i)
    if len(lr_side) != n // 2:
        raise VerificationFailed(f"unbalanced split {lr_side} / {rl_side} at {x}")
    for side, group in ((Side.LR, sorted(lr_side)), (Side.RL, sorted(rl_side))):
        child, _ = merge_diagonal(session.cake, x, side)
        _power_two(session.on(child), group, awards)


def prop_power_two(session: QuerySession) -> MultiAllocation:
    """Proportional, feasible, contiguous division when the layer count is a power of two."""
    m, n = session.m, session.n
    if m < 1 or m & (m - 1):
        raise PreconditionError(f"the recursive halving protocol needs a power-of-two layer count, got {m}")
    if n < m:
        raise PreconditionError(f"{m} layers cannot be shared by {n} agents without overlaps (need m <= n)")
    awards: dict = {}
    _power_two(session, list(range(n)), awards)
    return _check(session, awards, contiguous=True)


def equitable_partition(session: QuerySession, cutter: int, parts: int | None = None) -> EquitablePartition:
    """Split the session cake into as many pieces as it has layers, each worth
    exactly ``1/m`` of the cake to ``cutter``.

    Repeatedly take a layer worth at most the target and another worth at
    least it, cut the smallest ``x`` at which the top-left/bottom-right
    diagonal of that pair is worth exactly the target, hand it out, and merge
    the two leftovers into one layer.  Pieces come back in original
    coordinates; each is non-overlapping and at most one interval per layer
    it came from.
    """
    m = session.m
    if parts is not None and parts != m:
        raise PreconditionError(f"equitable partition makes one piece per layer: {parts} != {m}")
    vals = session.layer_values(cutter)
    total = sum(vals)
    if total <= 0:
        raise PreconditionError(f"agent {cutter} does not value this cake")
    target = total / m
    work = session.cake
    pieces = []
    while work.m > 1:
        # a merged residue is worth vals[j] + vals[j2] - target, no need to ask again
        j = next(k for k in range(work.m) if vals[k] <= target)
        j2 = next(k for k in range(work.m) if k != j and vals[k] >= target)
        pair = LayeredCake([work.layers[j], work.layers[j2]], work.n_original)
        x = session.on(pair).long_cut(cutter, target)
        pieces.append(pair.to_original(diagonal_piece(pair, x, Side.LR)))
        rest = diagonal_piece(pair, x, Side.RL)
        residue = Layer(pair.layers[0].restrict(rest[0]).parts + pair.layers[1].restrict(rest[1]).parts)
        lo, hi = min(j, j2), max(j, j2)
        layers = [residue if k == lo else layer for k, layer in enumerate(work.layers) if k != hi]
        vals = [vals[j] + vals[j2] - target if k == lo else v for k, v in enumerate(vals) if k != hi]
        work = LayeredCake(layers, work.n_original)
    pieces.append(_whole(work))
    return EquitablePartition(tuple(pieces), cutter)


def _matching_rounds(session: QuerySession, agents: list, awards: dict):
    session, agents = _peel(session, agents, awards)
    while agents:
        n = len(agents)
        cake = session.cake
        if n == 1:
            awards[agents[0]] = _whole(cake)
            return
        if n == 2:
            awards.update(_cut_and_choose(session, agents[0], agents[1]))
            return
        part = equitable_partition(session, agents[0])
        g = _round_graph(session, part, agents)
        matched = max_envy_free_matching(g)
        if not matched:
            raise VerificationFailed("empty envy-free matching")
        for i, h in matched.items():
            awards[i] = part.pieces[h]
        taken = set(matched.values())
        agents = [i for i in agents if i not in matched]
        layers = [Layer(enumerate(part.pieces[h])) for h in range(n) if h not in taken]
        session = session.on(LayeredCake(layers, cake.n_original))


def prop_matching(session: QuerySession) -> MultiAllocation:
    """Proportional and feasible division for any ``n >= m``."""
    m, n = session.m, session.n
    if n < m:
        raise PreconditionError(f"{m} layers cannot be shared by {n} agents without overlaps (need m <= n)")
    awards: dict = {}
    _matching_rounds(session, list(range(n)), awards)
    return _check(session, awards, contiguous=False)


def _round_graph(session: QuerySession, part: EquitablePartition, agents) -> BipartiteGraph:
    n = len(part.pieces)
    local = [session.cake.from_original(p) for p in part.pieces]
    edges = {}
    for i in agents:
        if i == part.cutter:
            # the cutter's pieces are equal by construction
            edges[i] = range(n)
            continue
        vals = [session.layered_value(i, lp) for lp in local]
        share = sum(vals)
        edges[i] = [h for h, v in enumerate(vals) if v * n >= share]
    return BipartiteGraph(agents, range(n), edges)


def matching_round_graph(session: QuerySession, part: EquitablePartition) -> BipartiteGraph:
    """Agent/piece graph of one matching round: an edge when the agent gets
    its proportional share of the session cake from the piece."""
    return _round_graph(session, part, range(session.n))
