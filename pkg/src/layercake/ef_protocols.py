"""Envy-free protocols: cut-and-choose, the three-agent moving knife, and the
perfect-partition construction without contiguity.

All three return a :class:`MultiAllocation` in original-layer coordinates and
check their own output exactly before returning it.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .core import (
    ONE, ZERO, MultiAllocation, Piece, PreconditionError, Rational, VerificationFailed,
)
from .rw_queries import QuerySession, Side, diagonal_piece, switching_point
from .verify import check_envy_free, check_structure


class NoIdenticalPair(PreconditionError):
    """The moving-knife protocol needs two agents with the same valuation."""


@dataclass(frozen=True)
class ShoutPoint:
    y: Rational
    x: Rational
    shouter: int


def _cut_and_choose(session: QuerySession, cutter: int, chooser: int) -> dict:
    cake = session.cake
    x = switching_point(session, cutter)
    lr = session.long_eval(chooser, x, Side.LR)
    rl = session.long_eval(chooser, x, Side.RL)
    side = Side.LR if lr >= rl else Side.RL
    return {
        chooser: cake.to_original(diagonal_piece(cake, x, side)),
        cutter: cake.to_original(diagonal_piece(cake, x, side.other())),
    }


def _verified(session: QuerySession, bundles: dict, contiguous: bool = True) -> MultiAllocation:
    alloc = MultiAllocation.from_mapping(bundles, session.n, session.cake.n_original)
    report = check_structure(session.cake, alloc)
    if not (report.feasible and report.complete and (report.contiguous or not contiguous)):
        raise VerificationFailed(f"structure check failed: {report}")
    if not check_envy_free(session.valuations, alloc):
        raise VerificationFailed("allocation is not envy-free")
    return alloc


def cut_and_choose(session: QuerySession, cutter: int = 0, chooser: int = 1) -> MultiAllocation:
    """Two agents, two layers: the cutter halves the cake along its switching
    point, the chooser takes the diagonal piece it weakly prefers (LR on a tie).

    Uses one long cut and two long evals.
    """
    if session.m != 2 or session.n != 2:
        raise PreconditionError(
            f"cut-and-choose needs 2 agents on a 2-layer cake, got {session.n} agents and {session.m} layers")
    if {cutter, chooser} != {0, 1}:
        raise ValueError("cutter and chooser must be agents 0 and 1")
    return _verified(session, _cut_and_choose(session, cutter, chooser))


# three agents, two layers

def _identical_pair(session: QuerySession) -> tuple[int, int]:
    profiles = []
    for i in range(session.n):
        dens = [session.reveal(i, k) for k in range(session.m)]
        total = sum((d.total for d in dens), ZERO)
        profiles.append(tuple(d.scaled(1 / total) for d in dens))
    for a, b in combinations(range(session.n), 2):
        if profiles[a] == profiles[b]:
            return a, b
    raise NoIdenticalPair("moving knife needs two agents with identical valuations")


def _linear_pieces(density, bps):
    """Per global segment, ``(slope, intercept)`` of the cumulative density."""
    out = []
    for lo, hi in zip(bps, bps[1:]):
        slope = density.value_at(lo)
        out.append((slope, density.cumulative(lo) - slope * lo))
    return out


def _solve_line(eq, ineqs):
    """Lexicographic minimum of ``(y, x)`` on ``eq == 0`` subject to ``ineqs >= 0``.

    Forms are ``(a, b, c)`` meaning ``a*y + b*x + c``; ``ineqs`` must bound the
    region.
    """
    ey, ex, e0 = eq
    if ex:
        p, q = -ey / ex, -e0 / ex
        reduced = [(a + b * p, b * q + c) for a, b, c in ineqs]
        t = _interval_min(reduced)
        return None if t is None else (t, p * t + q)
    if ey:
        y = -e0 / ey
        t = _interval_min([(b, a * y + c) for a, b, c in ineqs])
        return None if t is None else (y, t)
    if e0:
        return None
    return _polygon_lexmin(ineqs)


def _interval_min(constraints):
    lo = hi = None
    for a, c in constraints:
        if a == 0:
            if c < 0:
                return None
            continue
        bound = -c / a
        if a > 0:
            lo = bound if lo is None or bound > lo else lo
        else:
            hi = bound if hi is None or bound < hi else hi
    if lo is None or (hi is not None and lo > hi):
        return None
    return lo


def _polygon_lexmin(ineqs):
    best = None
    for (a1, b1, c1), (a2, b2, c2) in combinations(ineqs, 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        y = (-c1 * b2 + c2 * b1) / det
        x = (-a1 * c2 + a2 * c1) / det
        if all(a * y + b * x + c >= 0 for a, b, c in ineqs):
            if best is None or (y, x) < best:
                best = (y, x)
    return best


def _sub(f, g):
    return (f[0] - g[0], f[1] - g[1], f[2] - g[2])


def _diagonal_forms(lin1, lin2, t1, t2, sy, sx, x_ge_y):
    """Affine forms in ``(y, x)`` for Y, LR and RL over the cake with ``[0, y]``
    of the top layer removed, valid on one cell."""
    a1y, c1y = lin1[sy]
    a1x, c1x = lin1[sx]
    a2x, c2x = lin2[sx]
    top = (a1y, ZERO, c1y)
    if x_ge_y:
        lr = (-a1y, a1x - a2x, c1x - c1y + t2 - c2x)
        rl = (ZERO, a2x - a1x, t1 - c1x + c2x)
    else:
        lr = (ZERO, -a2x, t2 - c2x)
        rl = (-a1y, a2x, t1 - c1y + c2x)
    return top, lr, rl


def _first_outsider_shout(lin1, lin2, totals, pair, outsider, bps, y_limit):
    """Lexicographically smallest ``(y, x)`` where ``x`` is a switching point of
    the pair over the trimmed cake and the outsider weakly prefers ``Y`` to both
    diagonal pieces.  Only rows with ``y <= y_limit`` are searched."""
    p, c = pair[0], outsider
    nseg = len(bps) - 1
    for sy in range(nseg):
        ylo, yhi = bps[sy], bps[sy + 1]
        if y_limit is not None and ylo > y_limit:
            return None
        best = None
        for sx in range(nseg):
            xlo, xhi = bps[sx], bps[sx + 1]
            regions = []
            if xhi > ylo:
                regions.append(True)
            if xlo < yhi:
                regions.append(False)
            for x_ge_y in regions:
                _, lr_p, rl_p = _diagonal_forms(lin1[p], lin2[p], *totals[p], sy, sx, x_ge_y)
                h = _sub(lr_p, rl_p)
                corners = [h[0] * y + h[1] * x + h[2] for y in (ylo, yhi) for x in (xlo, xhi)]
                if all(v > 0 for v in corners) or all(v < 0 for v in corners):
                    continue
                top_c, lr_c, rl_c = _diagonal_forms(lin1[c], lin2[c], *totals[c], sy, sx, x_ge_y)
                ineqs = [
                    (ONE, ZERO, -ylo), (-ONE, ZERO, yhi), (ZERO, ONE, -xlo), (ZERO, -ONE, xhi),
                    (-ONE, ONE, ZERO) if x_ge_y else (ONE, -ONE, ZERO),
                    _sub(top_c, lr_c), _sub(top_c, rl_c),
                ]
                hit = _solve_line(h, ineqs)
                if hit is not None and (best is None or hit < best):
                    best = hit
        if best is not None:
            return best
    return None


def moving_knife_three(session: QuerySession) -> MultiAllocation:
    """See :func:`moving_knife_trace`; returns only the allocation."""
    return moving_knife_trace(session)[0]


def moving_knife_trace(session: QuerySession) -> tuple[MultiAllocation, ShoutPoint]:
    """Envy-free, feasible, contiguous division for three agents on two layers
    when two of the agents share a valuation.

    A short knife sweeps the top layer from the left while a long knife tracks
    a switching point of the identical pair over what remains.  Instead of
    simulating the motion, every cell of the breakpoint grid in ``(y, x)`` is
    solved exactly (all values are affine there) for the lexicographically
    first position where some agent weakly prefers the swept piece ``Y`` to
    both diagonal pieces.  The shouter takes ``Y``; the others take LR/RL.
    """
    if session.m != 2 or session.n != 3:
        raise PreconditionError(
            f"moving knife needs 3 agents on a 2-layer cake, got {session.n} agents and {session.m} layers")
    pair = _identical_pair(session)
    outsider = ({0, 1, 2} - set(pair)).pop()
    if not any(session.reveal(i, 0).total >= session.reveal(i, 1).total for i in range(3)):
        session = session.on(session.cake.reordered([1, 0]))
    cake = session.cake
    d1 = [session.reveal(i, 0) for i in range(3)]
    d2 = [session.reveal(i, 1) for i in range(3)]
    totals = [(d1[i].total, d2[i].total) for i in range(3)]
    bps = sorted(set().union(*(d.breakpoints for d in d1 + d2)))
    lin1 = [_linear_pieces(d, bps) for d in d1]
    lin2 = [_linear_pieces(d, bps) for d in d2]

    def trimmed(y):
        return cake.remove_from_layer(0, Piece.span(0, y))

    p = pair[0]
    pair_total = sum(totals[p])
    candidates = []
    y_pair = None
    if 3 * totals[p][0] >= pair_total:
        # pair members shout once Y is worth a third of the cake to them
        y_pair = d1[p].inverse(0, pair_total / 3)
        candidates.append((y_pair, switching_point(session.on(trimmed(y_pair)), p)))
    hit = _first_outsider_shout(lin1, lin2, totals, pair, outsider, bps, y_pair)
    if hit is not None:
        candidates.append(hit)
    if not candidates:
        raise VerificationFailed("nobody shouted; no agent weakly prefers the top layer")
    y, x = min(candidates)

    rest = session.on(trimmed(y))
    gains = {}
    lr_pref = {}
    for i in range(3):
        y_value = session.short_eval(i, 0, 0, y)
        lr = rest.long_eval(i, x, Side.LR)
        rl = rest.long_eval(i, x, Side.RL)
        gains[i] = y_value - max(lr, rl)
        lr_pref[i] = lr - rl
    strict = [i for i in range(3) if gains[i] > 0]
    shouter = strict[0] if strict else min(i for i in range(3) if gains[i] >= 0)
    a, b = sorted(set(range(3)) - {shouter})
    if outsider != shouter and lr_pref[outsider] != 0:
        lr_taker = outsider if lr_pref[outsider] > 0 else (b if outsider == a else a)
    elif lr_pref[a] != 0 or lr_pref[b] != 0:
        lr_taker = a if lr_pref[a] > 0 or lr_pref[b] < 0 else b
    else:
        lr_taker = a
    rl_taker = b if lr_taker == a else a

    rest_cake = rest.cake
    bundles = {
        shouter: cake.to_original((Piece.span(0, y) & cake.piece(0), Piece.empty())),
        lr_taker: rest_cake.to_original(diagonal_piece(rest_cake, x, Side.LR)),
        rl_taker: rest_cake.to_original(diagonal_piece(rest_cake, x, Side.RL)),
    }
    return _verified(session, bundles), ShoutPoint(y, x, shouter)


def ef_noncontiguous(session: QuerySession) -> MultiAllocation:
    """Envy-free feasible division for any ``n >= m`` without contiguity.

    Every density is constant between consecutive global breakpoints, so
    slicing each elementary segment into ``n`` equal-length parts and letting
    ``Y_h`` collect slice ``h`` of every segment gives a perfect partition:
    every agent values ``Y_h`` on layer ``j`` at exactly ``V_ij(C_j) / n``.
    Agent ``i`` gets ``Y_{(i + j) mod n}`` on layer ``j``, a bijection per
    layer and injective across layers because ``m <= n``.
    """
    n, m = session.n, session.m
    if m > n:
        raise PreconditionError(f"{m} layers cannot be shared by {n} agents without overlaps (need m <= n)")
    bps = set()
    for i in range(n):
        for k in range(m):
            bps.update(session.reveal(i, k).breakpoints)
    bps = sorted(bps)
    slices = [[] for _ in range(n)]
    for lo, hi in zip(bps, bps[1:]):
        width = (hi - lo) / n
        for h in range(n):
            slices[h].append((lo + h * width, lo + (h + 1) * width))
    groups = [Piece(s) for s in slices]
    cake = session.cake
    bundles = {
        i: cake.to_original(tuple(groups[(i + k) % n] & cake.piece(k) for k in range(m)))
        for i in range(n)
    }
    return _verified(session, bundles, contiguous=False)


def elementary_segment_count(session: QuerySession) -> int:
    """Number of segments between the global density breakpoints (no queries)."""
    bps = set()
    for i in range(session.n):
        for k in range(session.m):
            bps.update(session._density(i, k).breakpoints)
    return len(bps) - 1
