"""Exact interval algebra, step-function densities and the layered-cake data model.

Every quantity is an exact rational (``gmpy2.mpq``, interchangeable with
:class:`fractions.Fraction` in comparisons and hashing); nothing here rounds.
Pieces are closed-interval point sets in ``[0, 1]``.  Two closed intervals that
share only an endpoint are treated as disjoint (the shared point has measure
zero), which is how adjacent cuts are represented everywhere else.
"""
from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from gmpy2 import mpq

Rational = type(mpq())

ZERO = mpq(0)
ONE = mpq(1)


class NoSuchPoint(ValueError):
    """A cut query asked for a value the agent cannot reach."""


class PreconditionError(ValueError):
    """A protocol was called on an instance outside its guarantees."""


class VerificationFailed(RuntimeError):
    """A protocol produced an allocation that failed its own exact check."""


def as_rational(value) -> Rational:
    """Exact rational from an int, a ``"p/q"`` string, a Fraction or an mpq."""
    if type(value) is Rational:
        return value
    if isinstance(value, (int, str, Fraction)) and not isinstance(value, bool):
        return mpq(value)
    if type(value).__name__ == "mpz":
        return mpq(value)
    raise TypeError(f"refusing inexact or non-numeric value {value!r}; use int, str or Fraction")


class Interval(NamedTuple):
    lo: Rational
    hi: Rational

    @property
    def length(self) -> Rational:
        return self.hi - self.lo


def canonicalize(raw: Iterable) -> tuple[Interval, ...]:
    """Sort, merge overlapping or touching intervals and drop degenerate ones.

    >>> canonicalize([(0, "1/2"), ("1/2", 1)])
    (Interval(lo=mpq(0,1), hi=mpq(1,1)),)
    """
    items = []
    for lo, hi in raw:
        lo, hi = as_rational(lo), as_rational(hi)
        if not (ZERO <= lo <= ONE and ZERO <= hi <= ONE):
            raise ValueError(f"interval [{lo}, {hi}] leaves [0, 1]")
        if lo > hi:
            raise ValueError(f"interval [{lo}, {hi}] has lo > hi")
        if lo < hi:
            items.append((lo, hi))
    items.sort()
    merged: list[list[Rational]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return tuple(Interval(lo, hi) for lo, hi in merged)


class Piece:
    """A finite union of disjoint closed intervals of ``[0, 1]``, kept canonical."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable = ()):
        self.intervals = canonicalize(intervals)

    @classmethod
    def _trusted(cls, intervals: tuple[Interval, ...]) -> "Piece":
        piece = cls.__new__(cls)
        piece.intervals = intervals
        return piece

    @classmethod
    def span(cls, lo, hi) -> "Piece":
        return cls([(lo, hi)])

    @classmethod
    def full(cls) -> "Piece":
        return cls._trusted((Interval(ZERO, ONE),))

    @classmethod
    def empty(cls) -> "Piece":
        return cls._trusted(())

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, Piece) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"[{iv.lo}, {iv.hi}]" for iv in self.intervals)
        return f"Piece({body})"

    @property
    def measure(self) -> Rational:
        return sum((iv.length for iv in self.intervals), ZERO)

    @property
    def bounds(self) -> Interval | None:
        if not self.intervals:
            return None
        return Interval(self.intervals[0].lo, self.intervals[-1].hi)

    def is_contiguous(self) -> bool:
        return len(self.intervals) <= 1

    def union(self, other: "Piece") -> "Piece":
        if not other.intervals:
            return self
        if not self.intervals:
            return other
        out: list[list[Rational]] = []
        for lo, hi in heapq.merge(self.intervals, other.intervals):
            if out and lo <= out[-1][1]:
                if hi > out[-1][1]:
                    out[-1][1] = hi
            else:
                out.append([lo, hi])
        return Piece._trusted(tuple(Interval(lo, hi) for lo, hi in out))

    def intersect(self, other: "Piece") -> "Piece":
        out = []
        a, b = self.intervals, other.intervals
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i].lo, b[j].lo)
            hi = min(a[i].hi, b[j].hi)
            if lo < hi:
                out.append(Interval(lo, hi))
            if a[i].hi < b[j].hi:
                i += 1
            else:
                j += 1
        return Piece._trusted(tuple(out))

    def subtract(self, other: "Piece") -> "Piece":
        # closure of the set difference
        out = []
        cuts = other.intervals
        for iv in self.intervals:
            lo = iv.lo
            for c in cuts:
                if c.hi <= lo:
                    continue
                if c.lo >= iv.hi:
                    break
                if c.lo > lo:
                    out.append(Interval(lo, c.lo))
                lo = max(lo, c.hi)
                if lo >= iv.hi:
                    break
            if lo < iv.hi:
                out.append(Interval(lo, iv.hi))
        return Piece._trusted(tuple(out))

    def clip(self, lo, hi) -> "Piece":
        return self.intersect(Piece.span(lo, hi))

    __or__ = union
    __and__ = intersect
    __sub__ = subtract


def piece_algebra(a: Piece, b: Piece, op: str) -> Piece:
    """Dispatch ``union``, ``intersect`` or ``subtract`` by name."""
    ops = {"union": Piece.union, "intersect": Piece.intersect, "subtract": Piece.subtract}
    try:
        return ops[op](a, b)
    except KeyError:
        raise ValueError(f"unknown piece operation {op!r}") from None


@dataclass(frozen=True)
class StepDensity:
    """Piecewise-constant density on ``[0, 1]``.

    ``breakpoints`` runs from 0 to 1 and ``values[k]`` is the density on
    ``[breakpoints[k], breakpoints[k + 1]]``.  Neighbouring segments with equal
    values are merged on construction, so two densities describing the same
    function compare equal.
    """

    breakpoints: tuple[Rational, ...]
    values: tuple[Rational, ...]
    _cum: tuple[Rational, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bps = tuple(as_rational(b) for b in self.breakpoints)
        vals = tuple(as_rational(v) for v in self.values)
        if len(bps) != len(vals) + 1 or not vals:
            raise ValueError("need len(breakpoints) == len(values) + 1 >= 2")
        if bps[0] != ZERO or bps[-1] != ONE:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b >= c for b, c in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(v < 0 for v in vals):
            raise ValueError("density values must be nonnegative")
        keep_b, keep_v = [bps[0]], [vals[0]]
        for b, v in zip(bps[1:-1], vals[1:]):
            if v == keep_v[-1]:
                continue
            keep_b.append(b)
            keep_v.append(v)
        keep_b.append(ONE)
        cum = [ZERO]
        for k, v in enumerate(keep_v):
            cum.append(cum[-1] + v * (keep_b[k + 1] - keep_b[k]))
        object.__setattr__(self, "breakpoints", tuple(keep_b))
        object.__setattr__(self, "values", tuple(keep_v))
        object.__setattr__(self, "_cum", tuple(cum))

    @classmethod
    def constant(cls, value=1) -> "StepDensity":
        return cls((ZERO, ONE), (as_rational(value),))

    @classmethod
    def from_segments(cls, segments: Sequence[tuple], start=0, end=1) -> "StepDensity":
        """Build from ``(to, value)`` pairs tiling ``[start, end]``; zero elsewhere."""
        start, end = as_rational(start), as_rational(end)
        bps, vals = [ZERO], []
        if start > 0:
            bps.append(start)
            vals.append(ZERO)
        at = start
        for to, value in segments:
            to, value = as_rational(to), as_rational(value)
            if to <= at:
                raise ValueError(f"segment end {to} does not advance past {at}")
            bps.append(to)
            vals.append(value)
            at = to
        if at != end:
            raise ValueError(f"segments end at {at}, layer ends at {end}")
        if end < 1:
            bps.append(ONE)
            vals.append(ZERO)
        return cls(tuple(bps), tuple(vals))

    @property
    def total(self) -> Rational:
        return self._cum[-1]

    def segments(self):
        """Yield ``(lo, hi, value)`` for each constant segment."""
        b = self.breakpoints
        for k, v in enumerate(self.values):
            yield b[k], b[k + 1], v

    def value_at(self, x) -> Rational:
        """Density just to the right of ``x`` (left of 1 at ``x == 1``)."""
        k = min(bisect_right(self.breakpoints, x) - 1, len(self.values) - 1)
        return self.values[k]

    def cumulative(self, x) -> Rational:
        if x <= 0:
            return ZERO
        if x >= 1:
            return self._cum[-1]
        k = bisect_right(self.breakpoints, x) - 1
        return self._cum[k] + self.values[k] * (x - self.breakpoints[k])

    def integral(self, lo, hi) -> Rational:
        return self.cumulative(hi) - self.cumulative(lo)

    def value_of(self, piece: Piece) -> Rational:
        # one left-to-right sweep over intervals and segments
        ivs = piece.intervals
        if not ivs:
            return ZERO
        if len(ivs) == 1:
            return self.integral(ivs[0].lo, ivs[0].hi)
        bps, vals = self.breakpoints, self.values
        k = bisect_right(bps, ivs[0].lo) - 1
        last = len(vals) - 1
        total = ZERO
        for lo, hi in ivs:
            while k < last and bps[k + 1] <= lo:
                k += 1
            while True:
                seg_hi = bps[k + 1]
                if hi <= seg_hi:
                    total += vals[k] * (hi - lo)
                    break
                total += vals[k] * (seg_hi - lo)
                lo = seg_hi
                k += 1
        return total

    def inverse(self, x, r) -> Rational:
        """Smallest ``y >= x`` with ``integral(x, y) == r``."""
        x, r = as_rational(x), as_rational(r)
        if r < 0:
            raise NoSuchPoint(f"negative target {r}")
        if r == 0:
            return x
        target = self.cumulative(x) + r
        if target > self._cum[-1]:
            raise NoSuchPoint(f"only {self._cum[-1] - self.cumulative(x)} available right of {x}, asked {r}")
        k = bisect_left(self._cum, target) - 1
        # _cum[k] < target <= _cum[k + 1], so values[k] > 0
        return self.breakpoints[k] + (target - self._cum[k]) / self.values[k]

    def scaled(self, factor) -> "StepDensity":
        factor = as_rational(factor)
        return StepDensity(self.breakpoints, tuple(v * factor for v in self.values))

    def masked(self, piece: Piece) -> "StepDensity":
        """The density restricted to ``piece`` (zero elsewhere)."""
        pts = set(self.breakpoints)
        for iv in piece.intervals:
            pts.add(iv.lo)
            pts.add(iv.hi)
        bps = sorted(pts)
        vals = []
        ivs = piece.intervals
        j = 0
        for lo, hi in zip(bps, bps[1:]):
            while j < len(ivs) and ivs[j].hi <= lo:
                j += 1
            inside = j < len(ivs) and ivs[j].lo <= lo and hi <= ivs[j].hi
            vals.append(self.value_at(lo) if inside else ZERO)
        return StepDensity(tuple(bps), tuple(vals))

    def __add__(self, other: "StepDensity") -> "StepDensity":
        bps = sorted(set(self.breakpoints) | set(other.breakpoints))
        vals = tuple(self.value_at(lo) + other.value_at(lo) for lo in bps[:-1])
        return StepDensity(tuple(bps), vals)


ZERO_DENSITY = StepDensity.constant(0)


class Layer:
    """One layer of a (possibly merged) cake.

    ``parts`` maps original layer indices to the point set this layer takes
    from them.  An unmerged layer has a single part.  Parts are pairwise
    disjoint as point sets, so the layer's own coordinates determine which
    original layer a point came from.
    """

    __slots__ = ("parts", "piece")

    def __init__(self, parts: Iterable[tuple[int, Piece]]):
        acc: dict[int, Piece] = {}
        for j, p in parts:
            if p:
                acc[j] = acc[j] | p if j in acc else p
        self.parts = tuple(sorted(acc.items()))
        piece = Piece.empty()
        for _, p in self.parts:
            if (piece & p).measure:
                raise ValueError("layer parts overlap")
            piece = piece | p
        self.piece = piece

    @classmethod
    def original(cls, j: int, piece: Piece) -> "Layer":
        return cls([(j, piece)])

    def __eq__(self, other) -> bool:
        return isinstance(other, Layer) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        return f"Layer({list(self.parts)!r})"

    def restrict(self, piece: Piece) -> "Layer":
        return Layer((j, p & piece) for j, p in self.parts)

    def remove(self, piece: Piece) -> "Layer":
        return Layer((j, p - piece) for j, p in self.parts)


LayeredPiece = tuple  # tuple[Piece, ...], one entry per layer of the cake it refers to


class LayeredCake:
    """Ordered stack of layers with provenance back to an original cake.

    ``n_original`` is the number of layers of the original cake that every
    part index refers to; an original cake has ``layers[j].parts == ((j, C_j),)``.
    """

    __slots__ = ("layers", "n_original")

    def __init__(self, layers: Sequence[Layer], n_original: int | None = None):
        self.layers = tuple(layers)
        if n_original is None:
            n_original = 1 + max((j for layer in self.layers for j, _ in layer.parts), default=-1)
        self.n_original = n_original

    @classmethod
    def from_intervals(cls, extents: Sequence[tuple]) -> "LayeredCake":
        layers = []
        for j, (lo, hi) in enumerate(extents):
            piece = Piece.span(lo, hi)
            if not piece:
                raise ValueError(f"layer {j} is empty")
            layers.append(Layer.original(j, piece))
        return cls(layers, len(layers))

    @classmethod
    def full(cls, m: int) -> "LayeredCake":
        return cls.from_intervals([(0, 1)] * m)

    @property
    def m(self) -> int:
        return len(self.layers)

    def __len__(self) -> int:
        return len(self.layers)

    def __eq__(self, other) -> bool:
        return (isinstance(other, LayeredCake) and self.layers == other.layers
                and self.n_original == other.n_original)

    def __repr__(self) -> str:
        return f"LayeredCake({list(self.layers)!r})"

    def piece(self, k: int) -> Piece:
        return self.layers[k].piece

    def pieces(self) -> LayeredPiece:
        return tuple(layer.piece for layer in self.layers)

    def empty_piece(self) -> LayeredPiece:
        return tuple(Piece.empty() for _ in self.layers)

    def is_original(self) -> bool:
        return all(len(layer.parts) == 1 and layer.parts[0][0] == k and layer.piece.is_contiguous()
                   for k, layer in enumerate(self.layers)) and self.m == self.n_original

    def to_original(self, lp: Sequence[Piece]) -> LayeredPiece:
        """Map a layered piece of this cake to original-layer coordinates."""
        if len(lp) != self.m:
            raise ValueError(f"layered piece has {len(lp)} layers, cake has {self.m}")
        out = [Piece.empty() for _ in range(self.n_original)]
        for layer, x in zip(self.layers, lp):
            if not x:
                continue
            for j, part in layer.parts:
                out[j] = out[j] | (x & part)
        return tuple(out)

    def from_original(self, lp: Sequence[Piece]) -> LayeredPiece:
        """Inverse of :meth:`to_original` for pieces lying inside this cake."""
        out = []
        for layer in self.layers:
            acc = Piece.empty()
            for j, part in layer.parts:
                acc = acc | (lp[j] & part)
            out.append(acc)
        return tuple(out)

    def with_layers(self, layers: Sequence[Layer]) -> "LayeredCake":
        return LayeredCake(layers, self.n_original)

    def reordered(self, order: Sequence[int]) -> "LayeredCake":
        if sorted(order) != list(range(self.m)):
            raise ValueError(f"{order!r} is not a permutation of the layers")
        return self.with_layers([self.layers[k] for k in order])

    def remove_from_layer(self, k: int, piece: Piece) -> "LayeredCake":
        layers = list(self.layers)
        layers[k] = layers[k].remove(piece)
        return self.with_layers(layers)


class Valuation:
    """One agent's per-original-layer step densities.

    With ``normalize=True`` (the default) densities are rescaled so the whole
    cake is worth exactly 1.  Passing ``cake`` zeroes each density outside
    its layer's extent, so integrals over ``[0, 1]`` only see the cake.
    """

    __slots__ = ("layers",)

    def __init__(self, densities: Sequence[StepDensity], cake: LayeredCake | None = None,
                 normalize: bool = True):
        dens = tuple(densities)
        if cake is not None:
            if len(dens) != cake.n_original:
                raise ValueError(f"{len(dens)} densities for a {cake.n_original}-layer cake")
            dens = tuple(d.masked(layer.piece) for d, layer in zip(dens, cake.layers))
        total = sum((d.total for d in dens), ZERO)
        if total <= 0:
            raise ValueError("valuation is worth nothing on this cake")
        if normalize and total != 1:
            dens = tuple(d.scaled(1 / total) for d in dens)
        self.layers = dens

    @classmethod
    def uniform(cls, weights: Sequence, cake: LayeredCake | None = None) -> "Valuation":
        """Constant density on each layer, proportional to ``weights``."""
        return cls([StepDensity.constant(w) for w in weights], cake)

    def __eq__(self, other) -> bool:
        return isinstance(other, Valuation) and self.layers == other.layers

    def __hash__(self) -> int:
        return hash(self.layers)

    def __repr__(self) -> str:
        return f"Valuation({list(self.layers)!r})"

    @property
    def m(self) -> int:
        return len(self.layers)

    @property
    def total(self) -> Rational:
        return sum((d.total for d in self.layers), ZERO)

    def piece_value(self, j: int, piece: Piece) -> Rational:
        return self.layers[j].value_of(piece)

    def bundle_value(self, lp: Sequence[Piece]) -> Rational:
        return sum((d.value_of(p) for d, p in zip(self.layers, lp)), ZERO)

    def layer_density(self, layer: Layer) -> StepDensity:
        """Density seen on a (possibly merged) layer."""
        dens = None
        for j, part in layer.parts:
            d = self.layers[j].masked(part)
            dens = d if dens is None else dens + d
        return ZERO_DENSITY if dens is None else dens


def piece_value(v: Valuation, layer: int, x: Piece) -> Rational:
    return v.piece_value(layer, x)


def bundle_value(v: Valuation, p: Sequence[Piece]) -> Rational:
    return v.bundle_value(p)


@dataclass(frozen=True)
class MultiAllocation:
    """Bundles in original-layer coordinates, indexed by agent."""

    bundles: tuple

    @classmethod
    def from_mapping(cls, mapping: dict, n_agents: int, n_layers: int) -> "MultiAllocation":
        empty = tuple(Piece.empty() for _ in range(n_layers))
        return cls(tuple(tuple(mapping.get(i, empty)) for i in range(n_agents)))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def piece_counts(self) -> list[list[int]]:
        """Number of contiguous intervals per agent per layer."""
        return [[len(p) for p in bundle] for bundle in self.bundles]

    def values(self, valuations: Sequence[Valuation]) -> list[list[Rational]]:
        """``values(...)[i][k]`` is agent ``i``'s value for bundle ``k``."""
        return [[v.bundle_value(b) for b in self.bundles] for v in valuations]
