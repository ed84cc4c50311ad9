from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from layercake import (
    Interval, LayeredCake, Piece, StepDensity, Valuation, as_rational, bundle_value, piece_value,
)
from layercake.core import canonicalize, piece_algebra

import oracles

# density 3/2 on [0,1/2], 1/2 on [1/2,1]
SKEWED = StepDensity((0, F(1, 2), 1), (F(3, 2), F(1, 2)))


def iv(*pairs):
    return tuple(Interval(as_rational(a), as_rational(b)) for a, b in pairs)


class TestCanonicalize:
    def test_touching_intervals_merge(self):
        assert canonicalize([(0, F(1, 2)), (F(1, 2), 1)]) == iv((0, 1))

    def test_reversed_interval_rejected(self):
        with pytest.raises(ValueError, match="lo > hi"):
            canonicalize([(F(1, 4), F(1, 8))])

    def test_overlap_merges(self):
        got = canonicalize([(0, F(1, 3)), (F(1, 4), F(1, 2))])
        assert got == iv((0, F(1, 2)))
        # point-set union on a 1/1000 grid
        assert oracles.grid_point_set(got) == oracles.grid_point_set([(0, F(1, 3)), (F(1, 4), F(1, 2))])

    def test_degenerate_dropped(self):
        assert canonicalize([(F(1, 3), F(1, 3)), (0, F(1, 5))]) == iv((0, F(1, 5)))

    def test_outside_unit_interval(self):
        with pytest.raises(ValueError):
            canonicalize([(0, 2)])

    def test_floats_refused(self):
        with pytest.raises(TypeError):
            Piece([(0, 0.5)])


class TestPieceAlgebra:
    def test_intersect(self):
        assert piece_algebra(Piece.full(), Piece.span(F(1, 3), F(2, 3)), "intersect") == Piece.span(F(1, 3), F(2, 3))

    def test_subtract(self):
        assert piece_algebra(Piece.full(), Piece.span(0, F(2, 5)), "subtract") == Piece.span(F(2, 5), 1)

    def test_union_keeps_gap(self):
        got = piece_algebra(Piece.span(0, F(1, 4)), Piece.span(F(3, 4), 1), "union")
        assert got.intervals == iv((0, F(1, 4)), (F(3, 4), 1))

    def test_unknown_op(self):
        with pytest.raises(ValueError):
            piece_algebra(Piece.full(), Piece.full(), "xor")

    def test_contiguity_and_measure(self):
        p = Piece([(0, F(1, 4)), (F(1, 2), F(3, 4))])
        assert not p.is_contiguous()
        assert p.measure == F(1, 2)
        assert Piece.empty().is_contiguous()


class TestValues:
    def test_uniform_half(self):
        v = Valuation([StepDensity.constant(1)], normalize=False)
        assert piece_value(v, 0, Piece.span(0, F(1, 2))) == F(1, 2)

    def test_empty_piece(self):
        v = Valuation([SKEWED], normalize=False)
        assert piece_value(v, 0, Piece.empty()) == 0

    def test_skewed_middle(self):
        v = Valuation([SKEWED], normalize=False)
        got = piece_value(v, 0, Piece.span(F(1, 4), F(3, 4)))
        assert got == F(1, 2)
        assert abs(oracles.grid_integral(SKEWED, F(1, 4), F(3, 4)) - 0.5) < 1e-9

    def test_bundle_empty_and_whole(self):
        v = Valuation([SKEWED, StepDensity.constant(3)])
        assert bundle_value(v, (Piece.empty(), Piece.empty())) == 0
        assert bundle_value(v, (Piece.full(), Piece.full())) == 1

    def test_bundle_crosswise(self):
        v = Valuation.uniform([1, 1])
        got = bundle_value(v, (Piece.span(0, F(1, 2)), Piece.span(F(1, 2), 1)))
        assert got == F(1, 2)
        assert got == piece_value(v, 0, Piece.span(0, F(1, 2))) + piece_value(v, 1, Piece.span(F(1, 2), 1))

    def test_mask_to_layer_extent(self):
        cake = LayeredCake.from_intervals([(0, F(1, 2)), (F(1, 4), 1)])
        v = Valuation.uniform([1, 1], cake)
        assert v.piece_value(0, Piece.full()) == F(2, 5)
        assert v.piece_value(1, Piece.span(0, F(1, 4))) == 0

    def test_worthless_valuation_rejected(self):
        with pytest.raises(ValueError):
            Valuation([StepDensity.constant(0)])

    def test_negative_density_rejected(self):
        with pytest.raises(ValueError):
            StepDensity((0, 1), (-1,))

    def test_equal_neighbours_merge(self):
        d = StepDensity((0, F(1, 3), 1), (2, 2))
        assert d == StepDensity.constant(2)

    def test_inverse(self):
        d = StepDensity((0, F(1, 4), F(3, 4), 1), (2, 0, F(2, 3)))
        assert d.inverse(0, F(3, 5)) == F(9, 10)


# strategies

grid = st.integers(0, 64).map(lambda k: F(k, 64))


@st.composite
def pieces(draw, max_size=4):
    raw = draw(st.lists(st.tuples(grid, grid), max_size=max_size))
    return Piece([(min(a, b), max(a, b)) for a, b in raw])


@st.composite
def densities(draw):
    cuts = sorted(set(draw(st.lists(st.integers(1, 63), max_size=5))))
    bps = [0] + [F(c, 64) for c in cuts] + [1]
    vals = draw(st.lists(st.integers(0, 9), min_size=len(bps) - 1, max_size=len(bps) - 1))
    return StepDensity(tuple(bps), tuple(vals))


@given(pieces(), pieces(), densities())
def test_value_is_additive(a, b, d):
    assert d.value_of(a.union(b)) + d.value_of(a.intersect(b)) == d.value_of(a) + d.value_of(b)


@given(pieces(), pieces())
def test_subtract_and_intersect_split_a_piece(a, b):
    assert a.subtract(b).measure + a.intersect(b).measure == a.measure
    assert not a.subtract(b).intersect(b).measure


@given(st.lists(st.tuples(grid, grid), max_size=6))
def test_canonicalize_is_idempotent(raw):
    once = canonicalize([(min(a, b), max(a, b)) for a, b in raw])
    assert canonicalize(once) == once
    assert all(x.hi < y.lo for x, y in zip(once, once[1:]))


@given(densities())
def test_whole_layer_value_is_segment_sum(d):
    assert d.value_of(Piece.full()) == sum((hi - lo) * v for lo, hi, v in d.segments())


@settings(max_examples=50)
@given(st.lists(densities(), min_size=1, max_size=4))
def test_normalized_layers_sum_to_one(ds):
    if sum(d.total for d in ds) == 0:
        return
    v = Valuation(ds)
    assert sum(v.piece_value(j, Piece.full()) for j in range(len(ds))) == 1


@settings(max_examples=30)
@given(densities(), grid, grid)
def test_integral_matches_grid_oracle(d, a, b):
    lo, hi = min(a, b), max(a, b)
    # midpoint rule: at most one step times the largest jump at each breakpoint
    tol = 1e-4 * 2 * max(d.values) * len(d.values) + 1e-12
    assert abs(float(d.integral(lo, hi)) - oracles.grid_integral(d, lo, hi)) <= tol
